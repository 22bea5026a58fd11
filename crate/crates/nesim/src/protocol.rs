//! The per-round protocol an agent runs on its inbox: coordinate-wise
//! trimmed averaging, then a gradient step on the agent's own action block.
//!
//! For each coordinate, the filter removes up to `d` received values strictly
//! greater than the agent's own (largest first, ties resolved by removing the
//! lowest sender index first) and up to `d` strictly smaller (smallest
//! first, same tie rule), then averages the survivors together with the
//! agent's own value, all with equal weight. Values equal to the agent's own
//! are never removed.
//!
//! The module also reconstructs the averaging step as an explicit weight row
//! over senders, and can rewrite a row whose support includes adversarial
//! senders into an equivalent row supported only on truthful agents (used
//! when recording weight matrices from a run under attack).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::game::{GameError, GameSpec};

#[derive(Debug, Error)]
pub enum ProtocolError {
    #[error("duplicate sender {sender} in batch for receiver {receiver}")]
    DuplicateSender { receiver: usize, sender: usize },
    #[error("message from {sender} has {got} values, expected {expected}")]
    LengthMismatch { sender: usize, expected: usize, got: usize },
    #[error("message from {sender} contains a non-finite value")]
    NonFiniteMessage { sender: usize },
    #[error(
        "cannot express retained value {value} at coordinate {coordinate} for receiver \
         {receiver} as a combination of truthful values"
    )]
    UnrepresentableRow { receiver: usize, coordinate: usize, value: f64 },
    #[error(transparent)]
    Game(#[from] GameError),
}

/// Trim parameter and weight floor of the screening step.
///
/// `d` is the per-side trim count (the number of tolerated adversarial
/// in-neighbors). `eta` is the guaranteed lower bound on nonzero averaging
/// weights; with uniform averaging it must satisfy
/// `eta <= 1 / (max in-degree + 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterConfig {
    pub d: usize,
    pub eta: f64,
}

/// One agent's belief about the whole stacked action profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateVector {
    pub values: Vec<f64>,
}

impl EstimateVector {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn zeros(len: usize) -> Self {
        Self { values: vec![0.0; len] }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// A received belief vector, after any channel attacks.
#[derive(Debug, Clone, PartialEq)]
pub struct Message {
    pub sender: usize,
    pub values: Vec<f64>,
}

/// Everything one agent received in one round, sorted by sender.
#[derive(Debug, Clone, PartialEq)]
pub struct MessageBatch {
    pub receiver: usize,
    pub messages: Vec<Message>,
}

impl MessageBatch {
    /// Validates and sorts the inbox: unique senders, uniform length
    /// `expected_len`, finite entries.
    pub fn new(
        receiver: usize,
        mut messages: Vec<Message>,
        expected_len: usize,
    ) -> Result<Self, ProtocolError> {
        messages.sort_by_key(|m| m.sender);
        for pair in messages.windows(2) {
            if pair[0].sender == pair[1].sender {
                return Err(ProtocolError::DuplicateSender {
                    receiver,
                    sender: pair[0].sender,
                });
            }
        }
        for m in &messages {
            if m.values.len() != expected_len {
                return Err(ProtocolError::LengthMismatch {
                    sender: m.sender,
                    expected: expected_len,
                    got: m.values.len(),
                });
            }
            if !m.values.iter().all(|v| v.is_finite()) {
                return Err(ProtocolError::NonFiniteMessage { sender: m.sender });
            }
        }
        Ok(Self { receiver, messages })
    }

    pub fn len(&self) -> usize {
        self.messages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.messages.is_empty()
    }
}

/// Trim bookkeeping for one coordinate: which senders were removed on each
/// side (in removal order) and which survived (sorted by sender).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrimTrace {
    pub removed_high: Vec<usize>,
    pub removed_low: Vec<usize>,
    pub retained: Vec<usize>,
}

/// Trims and averages the full inbox, one coordinate at a time. Fast path:
/// no per-sender bookkeeping. The traced variant and the property tests pin
/// this to the same results.
pub fn prune_and_average(own: &EstimateVector, batch: &MessageBatch, d: usize) -> Vec<f64> {
    let n = own.len();
    let mut out = vec![0.0; n];
    let mut above: Vec<f64> = Vec::with_capacity(batch.len());
    let mut below: Vec<f64> = Vec::with_capacity(batch.len());
    for c in 0..n {
        let own_c = own.values[c];
        let mut sum = own_c;
        let mut count = 1usize;
        above.clear();
        below.clear();
        for m in &batch.messages {
            let v = m.values[c];
            sum += v;
            count += 1;
            if v > own_c {
                above.push(v);
            } else if v < own_c {
                below.push(v);
            }
        }
        if d > 0 {
            sum -= sum_of_largest(&mut above, d);
            sum -= sum_of_smallest(&mut below, d);
            count -= d.min(above.len()) + d.min(below.len());
        }
        out[c] = sum / count as f64;
    }
    out
}

/// Sum of the `d` largest entries (all of them if fewer). Reorders `vals`.
fn sum_of_largest(vals: &mut [f64], d: usize) -> f64 {
    if vals.len() <= d {
        return vals.iter().sum();
    }
    let k = vals.len() - d - 1;
    vals.select_nth_unstable_by(k, f64::total_cmp);
    vals[k + 1..].iter().sum()
}

/// Sum of the `d` smallest entries (all of them if fewer). Reorders `vals`.
fn sum_of_smallest(vals: &mut [f64], d: usize) -> f64 {
    if vals.len() <= d {
        return vals.iter().sum();
    }
    vals.select_nth_unstable_by(d - 1, f64::total_cmp);
    vals[..d].iter().sum()
}

/// Trimmed average with full per-coordinate bookkeeping. Used when
/// recording weight matrices and in tests; `prune_and_average` is the fast
/// equivalent.
pub fn prune_and_average_traced(
    own: &EstimateVector,
    batch: &MessageBatch,
    d: usize,
) -> (Vec<f64>, Vec<TrimTrace>) {
    let n = own.len();
    let mut out = vec![0.0; n];
    let mut traces = Vec::with_capacity(n);
    for c in 0..n {
        let own_c = own.values[c];
        let entries: Vec<(usize, f64)> =
            batch.messages.iter().map(|m| (m.sender, m.values[c])).collect();
        let (v, trace) = trim_coordinate(own_c, &entries, d);
        out[c] = v;
        traces.push(trace);
    }
    (out, traces)
}

/// One-coordinate trim: removes up to `d` values strictly above `own`
/// (largest first, ties lowest sender first) and up to `d` strictly below
/// (smallest first, same tie rule), then averages survivors with `own`.
pub fn trim_coordinate(own: f64, entries: &[(usize, f64)], d: usize) -> (f64, TrimTrace) {
    let mut high: Vec<(usize, f64)> =
        entries.iter().copied().filter(|&(_, v)| v > own).collect();
    let mut low: Vec<(usize, f64)> =
        entries.iter().copied().filter(|&(_, v)| v < own).collect();
    // Removal order: largest value first, lowest sender breaking ties.
    high.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    low.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    let removed_high: Vec<usize> = high.iter().take(d).map(|&(s, _)| s).collect();
    let removed_low: Vec<usize> = low.iter().take(d).map(|&(s, _)| s).collect();
    let mut retained: Vec<usize> = entries
        .iter()
        .map(|&(s, _)| s)
        .filter(|s| !removed_high.contains(s) && !removed_low.contains(s))
        .collect();
    retained.sort_unstable();
    let mut sum = own;
    for &(s, v) in entries {
        if retained.binary_search(&s).is_ok() {
            sum += v;
        }
    }
    let v = sum / (retained.len() + 1) as f64;
    (v, TrimTrace { removed_high, removed_low, retained })
}

/// The averaging step as an explicit weight row over `n` agents: weight
/// `1 / (retained + 1)` on the receiver and on each retained sender.
pub fn uniform_weight_row(n: usize, receiver: usize, retained: &[usize]) -> Vec<f64> {
    let w = 1.0 / (retained.len() + 1) as f64;
    let mut row = vec![0.0; n];
    row[receiver] = w;
    for &s in retained {
        row[s] += w;
    }
    row
}

/// Rewrites one coordinate's averaging row so its support contains only
/// truthful agents, preserving the averaged value exactly.
///
/// Each retained adversarial value is expressed as a convex combination of
/// two bracketing truthful values (the receiver's own value counts as
/// truthful) and its weight split accordingly. A retained adversarial value
/// that no truthful values bracket cannot be rewritten; that only happens
/// when the adversary set is not `d`-local, and surfaces as an error.
///
/// `retained` holds the retained senders with the values they sent;
/// `truthful_pool` holds every truthful in-neighbor with its true belief
/// coordinate. Returns a row over `n` agents.
pub fn truthful_equivalent_row(
    n: usize,
    receiver: usize,
    coordinate: usize,
    own_value: f64,
    retained: &[(usize, f64)],
    truthful_pool: &[(usize, f64)],
    is_adversary: &[bool],
) -> Result<Vec<f64>, ProtocolError> {
    let w = 1.0 / (retained.len() + 1) as f64;
    let mut row = vec![0.0; n];
    row[receiver] += w;
    for &(s, v) in retained {
        if !is_adversary[s] {
            row[s] += w;
            continue;
        }
        // Bracket v by truthful values; lowest sender wins ties, and the
        // receiver's own value participates with the receiver's index.
        let mut lo: Option<(usize, f64)> = None;
        let mut hi: Option<(usize, f64)> = None;
        let own_entry = [(receiver, own_value)];
        for &(t, tv) in truthful_pool.iter().chain(own_entry.iter()) {
            if tv <= v && lo.map_or(true, |(ls, lv)| tv > lv || (tv == lv && t < ls)) {
                lo = Some((t, tv));
            }
            if tv >= v && hi.map_or(true, |(hs, hv)| tv < hv || (tv == hv && t < hs)) {
                hi = Some((t, tv));
            }
        }
        match (lo, hi) {
            (Some((ls, lv)), Some((hs, hv))) => {
                if hv == lv {
                    row[ls] += w;
                } else {
                    let beta = (hv - v) / (hv - lv);
                    row[ls] += beta * w;
                    row[hs] += (1.0 - beta) * w;
                }
            }
            _ => {
                return Err(ProtocolError::UnrepresentableRow {
                    receiver,
                    coordinate,
                    value: v,
                });
            }
        }
    }
    Ok(row)
}

/// Overwrites the blocks of `values` belonging to directly observed agents
/// with those agents' true actions from the round-start snapshot.
pub fn apply_observation_override(
    values: &mut [f64],
    dims: &crate::game::Dims,
    observed_agents: &[usize],
    truth_stacked: &[f64],
) {
    for &m in observed_agents {
        let range = dims.range(m);
        values[range.clone()].copy_from_slice(&truth_stacked[range]);
    }
}

/// Replaces the agent's own action block of `values` with a gradient step
/// evaluated at `values`, leaving every other block untouched.
pub fn gradient_update(
    game: &GameSpec,
    agent: usize,
    values: &mut [f64],
    alpha: f64,
) -> Result<(), GameError> {
    let grad = game.eval_partial_gradient(agent, values)?;
    let range = game.dims().range(agent);
    for (slot, g) in values[range].iter_mut().zip(grad.iter()) {
        *slot -= alpha * g;
    }
    Ok(())
}
