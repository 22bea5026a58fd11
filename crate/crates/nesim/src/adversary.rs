//! Adversarial agents and channel-level attacks.
//!
//! An adversarial agent runs a genuine belief update of its own — averaging
//! only truthful neighbors' messages, applying observation overrides, and
//! descending its own cost — but what it *sends* is governed by its policy.
//! Channel attacks corrupt messages in flight on specific edges, regardless
//! of whether the sender is truthful.

use rand::Rng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Normal, Uniform};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::game::{GameError, GameSpec};
use crate::protocol::{
    apply_observation_override, gradient_update, EstimateVector, Message, MessageBatch,
    ProtocolError,
};
use crate::rng::{ScenarioRng, Stream};

#[derive(Debug, Error)]
pub enum AdversaryError {
    #[error("adversary {agent} received no truthful messages this round")]
    NoTruthfulNeighbors { agent: usize },
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
}

/// What an adversarial agent transmits instead of its honest belief.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AdversaryPolicy {
    /// Honest belief plus i.i.d. Gaussian noise per component, drawn
    /// independently per receiver and round.
    GaussianNoise { sigma: f64 },
    /// A fixed vector, every receiver, every round.
    ConstantSignal { values: Vec<f64> },
    /// I.i.d. uniform draws from `[lo, hi]` per component, receiver, round.
    UniformRandom { lo: f64, hi: f64 },
    /// Sends nothing; receivers see no message on the edge.
    Silent,
    /// Honest belief with the sender's own action block shifted by a fixed
    /// offset.
    SelfishDeceiver { lie_offset: Vec<f64> },
    /// Sends the honest belief unchanged. An agent with this policy is
    /// roster-labeled adversarial but behaviorally indistinguishable from a
    /// truthful one.
    Passthrough,
}

impl AdversaryPolicy {
    /// Cheap structural validation; scenario loading enforces the
    /// game-dependent length constraints.
    pub fn validate(&self) -> Result<(), String> {
        match self {
            Self::GaussianNoise { sigma } if !(sigma.is_finite() && *sigma >= 0.0) => {
                Err(format!("gaussian_noise sigma must be finite and >= 0, got {sigma}"))
            }
            Self::UniformRandom { lo, hi } if !(lo.is_finite() && hi.is_finite() && lo <= hi) => {
                Err(format!("uniform_random needs finite lo <= hi, got [{lo}, {hi}]"))
            }
            Self::ConstantSignal { values } if values.iter().any(|v| !v.is_finite()) => {
                Err("constant_signal values must be finite".into())
            }
            Self::SelfishDeceiver { lie_offset } if lie_offset.iter().any(|v| !v.is_finite()) => {
                Err("selfish_deceiver lie_offset must be finite".into())
            }
            _ => Ok(()),
        }
    }
}

/// In-flight corruption of the message on one communication edge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ChannelAttack {
    /// Removes the message with the given probability, independently per
    /// round.
    DropLink { to: usize, from: usize, probability: f64 },
    /// Adds i.i.d. Gaussian noise on every listed edge.
    Jam { edges: Vec<(usize, usize)>, sigma: f64 },
    /// Applies `y -> gain * y + offset` componentwise (`offset` must match
    /// the message length).
    ManInTheMiddle { to: usize, from: usize, gain: f64, offset: Vec<f64> },
}

impl ChannelAttack {
    pub fn validate(&self) -> Result<(), String> {
        match self {
            Self::DropLink { probability, .. }
                if !(probability.is_finite() && (0.0..=1.0).contains(probability)) =>
            {
                Err(format!("drop_link probability must be in [0, 1], got {probability}"))
            }
            Self::Jam { sigma, .. } if !(sigma.is_finite() && *sigma >= 0.0) => {
                Err(format!("jam sigma must be finite and >= 0, got {sigma}"))
            }
            Self::ManInTheMiddle { gain, offset, .. }
                if !gain.is_finite() || offset.iter().any(|v| !v.is_finite()) =>
            {
                Err("man_in_the_middle gain and offset must be finite".into())
            }
            _ => Ok(()),
        }
    }

    /// Edges this attack touches, as `(to, from)` pairs.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        match self {
            Self::DropLink { to, from, .. } | Self::ManInTheMiddle { to, from, .. } => {
                vec![(*to, *from)]
            }
            Self::Jam { edges, .. } => edges.clone(),
        }
    }

    fn touches(&self, to: usize, from: usize) -> bool {
        match self {
            Self::DropLink { to: t, from: f, .. }
            | Self::ManInTheMiddle { to: t, from: f, .. } => *t == to && *f == from,
            Self::Jam { edges, .. } => edges.contains(&(to, from)),
        }
    }
}

/// What the policy puts on the wire for one receiver this round, given the
/// sender's honest belief. `None` means no message is sent. `own_block` is
/// the sender's action block range within the belief vector.
pub fn corrupt_outgoing(
    policy: &AdversaryPolicy,
    honest: &[f64],
    own_block: std::ops::Range<usize>,
    rng: &mut ChaCha12Rng,
) -> Option<Vec<f64>> {
    match policy {
        AdversaryPolicy::GaussianNoise { sigma } => {
            let normal = Normal::new(0.0, *sigma).expect("validated sigma");
            Some(honest.iter().map(|v| v + normal.sample(rng)).collect())
        }
        AdversaryPolicy::ConstantSignal { values } => Some(values.clone()),
        AdversaryPolicy::UniformRandom { lo, hi } => {
            let uniform = Uniform::new_inclusive(*lo, *hi);
            Some(honest.iter().map(|_| uniform.sample(rng)).collect())
        }
        AdversaryPolicy::Silent => None,
        AdversaryPolicy::SelfishDeceiver { lie_offset } => {
            let mut out = honest.to_vec();
            for (slot, off) in out[own_block].iter_mut().zip(lie_offset.iter()) {
                *slot += off;
            }
            Some(out)
        }
        AdversaryPolicy::Passthrough => Some(honest.to_vec()),
    }
}

/// An adversarial agent's own belief update: uniform average of the truthful
/// inbox (no trimming, no self term), observation overrides, then a gradient
/// step on its own action block.
pub fn adversary_update(
    game: &GameSpec,
    agent: usize,
    truthful_inbox: &MessageBatch,
    observed_agents: &[usize],
    truth_stacked: &[f64],
    alpha: f64,
) -> Result<EstimateVector, AdversaryError> {
    if truthful_inbox.is_empty() {
        return Err(AdversaryError::NoTruthfulNeighbors { agent });
    }
    let n = game.total_dim();
    let mut v = vec![0.0; n];
    for m in &truthful_inbox.messages {
        for (slot, x) in v.iter_mut().zip(&m.values) {
            *slot += x;
        }
    }
    let count = truthful_inbox.len() as f64;
    for slot in v.iter_mut() {
        *slot /= count;
    }
    apply_observation_override(&mut v, game.dims(), observed_agents, truth_stacked);
    gradient_update(game, agent, &mut v, alpha)?;
    Ok(EstimateVector::new(v))
}

/// Applies every attack to the inbox, in declaration order. Each edge's
/// randomness comes from its own `(round, receiver, sender)` substream, so
/// results do not depend on message or edge iteration order.
pub fn apply_channel_attacks(
    batch: MessageBatch,
    attacks: &[ChannelAttack],
    round: u64,
    rng: &ScenarioRng,
) -> Result<MessageBatch, ProtocolError> {
    if attacks.is_empty() {
        return Ok(batch);
    }
    let receiver = batch.receiver;
    let expected_len = batch.messages.first().map_or(0, |m| m.values.len());
    let mut kept: Vec<Message> = Vec::with_capacity(batch.messages.len());
    for mut message in batch.messages {
        let sender = message.sender;
        let mut stream = rng.stream(Stream::ChannelAttack, round, receiver as u64, sender as u64);
        let mut dropped = false;
        for attack in attacks {
            if dropped || !attack.touches(receiver, sender) {
                continue;
            }
            match attack {
                ChannelAttack::DropLink { probability, .. } => {
                    if stream.gen_bool(*probability) {
                        dropped = true;
                    }
                }
                ChannelAttack::Jam { sigma, .. } => {
                    let normal = Normal::new(0.0, *sigma).expect("validated sigma");
                    for v in message.values.iter_mut() {
                        *v += normal.sample(&mut stream);
                    }
                }
                ChannelAttack::ManInTheMiddle { gain, offset, .. } => {
                    for (i, v) in message.values.iter_mut().enumerate() {
                        *v = gain * *v + offset.get(i).copied().unwrap_or(0.0);
                    }
                }
            }
        }
        if !dropped {
            kept.push(message);
        }
    }
    MessageBatch::new(receiver, kept, expected_len)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::Dims;
    use approx::assert_abs_diff_eq;
    use std::sync::Arc;

    fn stream() -> ChaCha12Rng {
        ScenarioRng::new(99).stream(Stream::AdversaryPolicy, 0, 1, 2)
    }

    #[test]
    fn constant_signal_ignores_honest_message() {
        let policy = AdversaryPolicy::ConstantSignal { values: vec![3.0, -1.0] };
        let out = corrupt_outgoing(&policy, &[7.0, 7.0], 0..1, &mut stream()).unwrap();
        assert_eq!(out, vec![3.0, -1.0]);
    }

    #[test]
    fn zero_sigma_noise_is_identity() {
        let policy = AdversaryPolicy::GaussianNoise { sigma: 0.0 };
        let honest = vec![1.0, -2.0, 0.5];
        let out = corrupt_outgoing(&policy, &honest, 0..1, &mut stream()).unwrap();
        assert_eq!(out, honest);
    }

    #[test]
    fn gaussian_noise_has_zero_empirical_mean() {
        let policy = AdversaryPolicy::GaussianNoise { sigma: 1.0 };
        let honest = vec![5.0, -5.0];
        let rng = ScenarioRng::new(2024);
        let trials = 100_000u64;
        let mut sums = [0.0f64; 2];
        for round in 0..trials {
            let mut s = rng.stream(Stream::AdversaryPolicy, round, 1, 2);
            let out = corrupt_outgoing(&policy, &honest, 0..1, &mut s).unwrap();
            sums[0] += out[0] - honest[0];
            sums[1] += out[1] - honest[1];
        }
        let bound = 3.0 / (trials as f64).sqrt();
        assert!(
            (sums[0] / trials as f64).abs() < bound,
            "component 0 mean {} exceeds {bound}",
            sums[0] / trials as f64
        );
        assert!((sums[1] / trials as f64).abs() < bound);
    }

    #[test]
    fn uniform_random_stays_in_range() {
        let policy = AdversaryPolicy::UniformRandom { lo: -2.0, hi: -1.0 };
        let mut s = stream();
        for _ in 0..100 {
            let out = corrupt_outgoing(&policy, &[0.0; 4], 0..1, &mut s).unwrap();
            assert!(out.iter().all(|v| (-2.0..=-1.0).contains(v)));
        }
        let degenerate = AdversaryPolicy::UniformRandom { lo: 1.5, hi: 1.5 };
        let out = corrupt_outgoing(&degenerate, &[0.0; 2], 0..1, &mut stream()).unwrap();
        assert_eq!(out, vec![1.5, 1.5]);
    }

    #[test]
    fn silent_sends_nothing_and_deceiver_shifts_own_block() {
        assert!(corrupt_outgoing(&AdversaryPolicy::Silent, &[1.0], 0..1, &mut stream()).is_none());
        let policy = AdversaryPolicy::SelfishDeceiver { lie_offset: vec![10.0, -10.0] };
        let honest = vec![1.0, 2.0, 3.0, 4.0];
        let out = corrupt_outgoing(&policy, &honest, 1..3, &mut stream()).unwrap();
        assert_eq!(out, vec![1.0, 12.0, -7.0, 4.0]);
        let pass = corrupt_outgoing(&AdversaryPolicy::Passthrough, &honest, 1..3, &mut stream());
        assert_eq!(pass.unwrap(), honest);
    }

    #[test]
    fn policy_validation_catches_bad_parameters() {
        assert!(AdversaryPolicy::GaussianNoise { sigma: -1.0 }.validate().is_err());
        assert!(AdversaryPolicy::UniformRandom { lo: 2.0, hi: 1.0 }.validate().is_err());
        assert!(AdversaryPolicy::ConstantSignal { values: vec![f64::NAN] }.validate().is_err());
        assert!(AdversaryPolicy::GaussianNoise { sigma: 0.5 }.validate().is_ok());
        assert!(ChannelAttack::DropLink { to: 0, from: 1, probability: 1.5 }
            .validate()
            .is_err());
        assert!(ChannelAttack::Jam { edges: vec![(0, 1)], sigma: -0.1 }.validate().is_err());
    }

    fn quadratic_two_agent() -> GameSpec {
        use nalgebra::{DMatrix, DVector};
        let g = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 2.0]);
        let b = DVector::from_vec(vec![-1.0, 1.0]);
        GameSpec::quadratic_affine(Dims::uniform(2, 1).unwrap(), g, b).unwrap()
    }

    #[test]
    fn update_with_single_neighbor_copies_unobserved_blocks() {
        let game = quadratic_two_agent();
        let inbox = MessageBatch::new(
            0,
            vec![Message { sender: 1, values: vec![0.7, -0.3] }],
            2,
        )
        .unwrap();
        let truth = vec![10.0, 20.0];
        // Agent 0 observes itself only.
        let v = adversary_update(&game, 0, &inbox, &[0], &truth, 0.1).unwrap();
        // Own block was overridden to the true action, then stepped.
        let mut expected = vec![10.0, -0.3];
        gradient_update(&game, 0, &mut expected, 0.1).unwrap();
        assert_abs_diff_eq!(v.values[0], expected[0], epsilon = 1e-15);
        assert_abs_diff_eq!(v.values[1], -0.3, epsilon = 1e-15);
    }

    #[test]
    fn update_requires_truthful_neighbors() {
        let game = quadratic_two_agent();
        let empty = MessageBatch::new(0, Vec::new(), 2).unwrap();
        assert!(matches!(
            adversary_update(&game, 0, &empty, &[], &[0.0, 0.0], 0.1),
            Err(AdversaryError::NoTruthfulNeighbors { agent: 0 })
        ));
    }

    #[test]
    fn zero_cost_adversary_only_averages() {
        let dims = Dims::uniform(2, 1).unwrap();
        let game = GameSpec::custom(
            dims,
            Arc::new(|_, _: &[f64]| 0.0),
            Arc::new(|_, _: &[f64]| vec![0.0]),
        );
        let inbox = MessageBatch::new(
            1,
            vec![
                Message { sender: 0, values: vec![2.0, 4.0] },
                Message { sender: 2, values: vec![4.0, 8.0] },
            ],
            2,
        )
        .unwrap();
        let v = adversary_update(&game, 1, &inbox, &[], &[0.0, 0.0], 0.5).unwrap();
        assert_eq!(v.values, vec![3.0, 6.0]);
    }

    fn sample_batch() -> MessageBatch {
        MessageBatch::new(
            0,
            vec![
                Message { sender: 1, values: vec![1.0, 2.0] },
                Message { sender: 2, values: vec![-1.0, 0.5] },
            ],
            2,
        )
        .unwrap()
    }

    #[test]
    fn empty_attack_list_is_identity() {
        let batch = sample_batch();
        let out =
            apply_channel_attacks(batch.clone(), &[], 3, &ScenarioRng::new(1)).unwrap();
        assert_eq!(out, batch);
    }

    #[test]
    fn certain_drop_removes_exactly_that_edge() {
        let attacks = vec![ChannelAttack::DropLink { to: 0, from: 2, probability: 1.0 }];
        let out =
            apply_channel_attacks(sample_batch(), &attacks, 3, &ScenarioRng::new(1)).unwrap();
        assert_eq!(out.messages.len(), 1);
        assert_eq!(out.messages[0].sender, 1);

        let keep = vec![ChannelAttack::DropLink { to: 0, from: 2, probability: 0.0 }];
        let out =
            apply_channel_attacks(sample_batch(), &keep, 3, &ScenarioRng::new(1)).unwrap();
        assert_eq!(out.messages.len(), 2);
    }

    #[test]
    fn silent_policy_equals_certain_drop() {
        // Receiver-side inboxes must be identical whether the sender stayed
        // silent or the channel dropped every message.
        let honest = vec![4.0, 2.0];
        let silent = corrupt_outgoing(&AdversaryPolicy::Silent, &honest, 0..1, &mut stream());
        assert!(silent.is_none());
        let from_silence = MessageBatch::new(0, Vec::new(), 2).unwrap();
        let attacks = vec![ChannelAttack::DropLink { to: 0, from: 2, probability: 1.0 }];
        let one_message = MessageBatch::new(
            0,
            vec![Message { sender: 2, values: honest }],
            2,
        )
        .unwrap();
        let from_drop =
            apply_channel_attacks(one_message, &attacks, 9, &ScenarioRng::new(5)).unwrap();
        assert_eq!(from_drop.messages, from_silence.messages);
    }

    #[test]
    fn mitm_negation_and_declaration_order() {
        let negate = vec![ChannelAttack::ManInTheMiddle {
            to: 0,
            from: 1,
            gain: -1.0,
            offset: vec![0.0, 0.0],
        }];
        let out =
            apply_channel_attacks(sample_batch(), &negate, 0, &ScenarioRng::new(1)).unwrap();
        assert_eq!(out.messages[0].values, vec![-1.0, -2.0]);
        assert_eq!(out.messages[1].values, vec![-1.0, 0.5]);

        // gain-then-shift differs from shift-then-gain.
        let double = ChannelAttack::ManInTheMiddle {
            to: 0,
            from: 1,
            gain: 2.0,
            offset: vec![0.0, 0.0],
        };
        let shift = ChannelAttack::ManInTheMiddle {
            to: 0,
            from: 1,
            gain: 1.0,
            offset: vec![1.0, 1.0],
        };
        let a = apply_channel_attacks(
            sample_batch(),
            &[double.clone(), shift.clone()],
            0,
            &ScenarioRng::new(1),
        )
        .unwrap();
        assert_eq!(a.messages[0].values, vec![3.0, 5.0]);
        let b = apply_channel_attacks(sample_batch(), &[shift, double], 0, &ScenarioRng::new(1))
            .unwrap();
        assert_eq!(b.messages[0].values, vec![4.0, 6.0]);
    }

    #[test]
    fn jam_is_deterministic_given_seed() {
        let attacks = vec![ChannelAttack::Jam { edges: vec![(0, 1), (0, 2)], sigma: 2.0 }];
        let rng = ScenarioRng::new(77);
        let a = apply_channel_attacks(sample_batch(), &attacks, 5, &rng).unwrap();
        let b = apply_channel_attacks(sample_batch(), &attacks, 5, &rng).unwrap();
        assert_eq!(a, b);
        let clean = sample_batch();
        assert_ne!(a.messages[0].values, clean.messages[0].values);
        let other_round = apply_channel_attacks(sample_batch(), &attacks, 6, &rng).unwrap();
        assert_ne!(a.messages[0].values, other_round.messages[0].values);

        let calm = vec![ChannelAttack::Jam { edges: vec![(0, 1)], sigma: 0.0 }];
        let out = apply_channel_attacks(sample_batch(), &calm, 5, &rng).unwrap();
        assert_eq!(out, clean);
    }

    #[test]
    fn attacks_on_other_edges_are_inert() {
        let attacks = vec![
            ChannelAttack::DropLink { to: 3, from: 1, probability: 1.0 },
            ChannelAttack::ManInTheMiddle { to: 1, from: 0, gain: 0.0, offset: vec![] },
        ];
        let out =
            apply_channel_attacks(sample_batch(), &attacks, 0, &ScenarioRng::new(1)).unwrap();
        assert_eq!(out, sample_batch());
    }
}
