//! The round-based simulator.
//!
//! Each round has four phases. First the true action profile is snapshotted
//! (an agent's action is the own block of its belief). Then every
//! communication edge carries the sender's belief, corrupted by the sender's
//! adversary policy and by any channel attacks on that edge. Next every agent
//! updates: truthful agents trim and average their inbox, override directly
//! observed blocks with true actions, and take a gradient step on their own
//! block; adversarial agents update rationally from the truthful messages
//! they received. Finally metrics are appended: distance of the action
//! profile to the centralized equilibrium, worst truthful estimate error,
//! and how many agents hit a fallback this round.
//!
//! With `record_weights` on, the simulator also emits, per round, the
//! row-stochastic matrix over truthful agents that reproduces the filtered
//! states exactly, plus those states themselves. These feed the
//! weight-matrix analyses in [`crate::analysis`].

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::adversary::{self, AdversaryError};
use crate::analysis::{assemble_wbar, AnalysisError, StackedWeightMatrix};
use crate::game::{ActionProfile, Dims, GameError};
use crate::graph::{check_assumptions, GraphError, RobustnessReport};
use crate::protocol::{
    self, EstimateVector, Message, MessageBatch, ProtocolError,
};
use crate::rng::{ScenarioRng, Stream};
use crate::scenario::{InitSpec, ScenarioConfig};
use rand::Rng;
use rand_distr::StandardNormal;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("assumption check failed for `{scenario}`: {report}")]
    AssumptionsNotMet { scenario: String, report: Box<RobustnessReport> },
    #[error("checkpoint belongs to scenario `{checkpoint}`, not `{expected}`")]
    CheckpointMismatch { checkpoint: String, expected: String },
    #[error("invalid checkpoint: {0}")]
    InvalidCheckpoint(String),
    #[error("failed to {action} `{path}`: {source}")]
    Io {
        action: &'static str,
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("checkpoint serialization failed: {0}")]
    CheckpointFormat(#[from] serde_json::Error),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Adversary(#[from] AdversaryError),
}

/// Whether to verify the convergence guarantee's graph assumptions before
/// running.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AssumptionMode {
    /// Refuse to run a scenario whose graphs and adversary roster violate
    /// the assumptions behind the convergence guarantee.
    Strict,
    /// Run regardless. Useful for demonstrating what failure looks like and
    /// for networks too large to check exhaustively.
    Permissive,
}

/// Per-round measurements, including an entry for round 0 (the initial
/// state, before any update).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub round: u64,
    /// Euclidean distance of the true action profile to the centralized
    /// equilibrium; NaN when the game has no closed-form oracle.
    pub dist_to_ne: f64,
    /// Worst truthful estimate error: max over truthful agents of the
    /// infinity norm of (belief − true action profile).
    pub consensus_err: f64,
    /// How many agents fell back this round: truthful agents whose inbox was
    /// below the `2d + 1` threshold plus adversaries with no truthful
    /// in-message. Zero for round 0.
    pub assumption_flags: u64,
}

/// Why a run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExitReason {
    /// `dist_to_ne` reached the scenario's `tol` at this round.
    Converged { round: u64 },
    /// Ran the full `max_iters` without meeting `tol`.
    MaxIters,
}

/// Per-round weight matrices and filtered states from a recording run.
/// `wbars[k]` maps the stacked round-`k` beliefs to `filtered_states[k]`,
/// the stacked post-filter, post-override estimates of round `k` (the state
/// the gradient step then acts on).
#[derive(Debug, Clone)]
pub struct RecordedRun {
    pub wbars: Vec<StackedWeightMatrix>,
    pub filtered_states: Vec<Vec<f64>>,
}

/// Everything a finished run reports.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub scenario: String,
    pub exit: ExitReason,
    /// Number of update rounds executed (`metrics` has one more entry).
    pub rounds_run: u64,
    pub metrics: Vec<Metrics>,
    pub final_beliefs: Vec<EstimateVector>,
    pub final_actions: ActionProfile,
    /// The centralized equilibrium, when the game supports solving for it.
    pub ne_oracle: Option<ActionProfile>,
    pub recorded: Option<RecordedRun>,
}

/// Resumable snapshot of a paused run. Randomness is derived per
/// `(round, edge)` from the scenario seed, so no generator state needs to be
/// carried: resuming at round `r` reproduces exactly what an uninterrupted
/// run would have done.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Checkpoint {
    pub scenario: String,
    pub round: u64,
    pub beliefs: Vec<Vec<f64>>,
    pub metrics: Vec<Metrics>,
}

impl Checkpoint {
    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), SimError> {
        let text = serde_json::to_string(self)?;
        std::fs::write(path.as_ref(), text).map_err(|source| SimError::Io {
            action: "write checkpoint",
            path: path.as_ref().display().to_string(),
            source,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, SimError> {
        let text = std::fs::read_to_string(path.as_ref()).map_err(|source| SimError::Io {
            action: "read checkpoint",
            path: path.as_ref().display().to_string(),
            source,
        })?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// Run a scenario to completion.
pub fn run(config: &ScenarioConfig, mode: AssumptionMode) -> Result<RunOutcome, SimError> {
    Simulation::new(config, mode)?.run_to_end()
}

/// A run in progress, steppable one round at a time.
pub struct Simulation<'a> {
    config: &'a ScenarioConfig,
    rng: ScenarioRng,
    is_adversary: Vec<bool>,
    ne: Option<ActionProfile>,
    round: u64,
    beliefs: Vec<EstimateVector>,
    metrics: Vec<Metrics>,
    recorded: Option<RecordedRun>,
    exit: Option<ExitReason>,
}

impl<'a> Simulation<'a> {
    pub fn new(config: &'a ScenarioConfig, mode: AssumptionMode) -> Result<Self, SimError> {
        if mode == AssumptionMode::Strict {
            let report = check_assumptions(
                &config.communication,
                &config.observation,
                &config.adversary_agents(),
                config.filter().d,
            )?;
            if !report.holds {
                return Err(SimError::AssumptionsNotMet {
                    scenario: config.name().to_string(),
                    report: Box::new(report),
                });
            }
        }

        let rng = ScenarioRng::new(config.run_settings().seed);
        let beliefs = initial_beliefs(config, &rng);
        let ne = match config.game.solve_ne_oracle() {
            Ok(x) => Some(x),
            Err(GameError::UnsupportedGame) => None,
            Err(e) => return Err(e.into()),
        };
        let n = config.num_agents();
        let mut sim = Self {
            config,
            rng,
            is_adversary: (0..n).map(|i| config.is_adversary(i)).collect(),
            ne,
            round: 0,
            beliefs,
            metrics: Vec::new(),
            recorded: config
                .run_settings()
                .record_weights
                .then(|| RecordedRun { wbars: Vec::new(), filtered_states: Vec::new() }),
            exit: None,
        };
        let m = sim.measure(0);
        sim.metrics.push(m);
        sim.update_exit();
        Ok(sim)
    }

    /// Rebuild a paused run from a checkpoint. The subsequent trajectory is
    /// identical to an uninterrupted run; weight recording, when enabled,
    /// covers only the rounds executed after resuming.
    pub fn resume(
        config: &'a ScenarioConfig,
        mode: AssumptionMode,
        checkpoint: Checkpoint,
    ) -> Result<Self, SimError> {
        if checkpoint.scenario != config.name() {
            return Err(SimError::CheckpointMismatch {
                checkpoint: checkpoint.scenario,
                expected: config.name().to_string(),
            });
        }
        let n = config.num_agents();
        let total = config.dims().total();
        if checkpoint.beliefs.len() != n
            || checkpoint.beliefs.iter().any(|b| b.len() != total)
        {
            return Err(SimError::InvalidCheckpoint(format!(
                "beliefs must be {n} vectors of length {total}"
            )));
        }
        if checkpoint.beliefs.iter().flatten().any(|v| !v.is_finite()) {
            return Err(SimError::InvalidCheckpoint("non-finite belief".into()));
        }
        if checkpoint.metrics.len() as u64 != checkpoint.round + 1 {
            return Err(SimError::InvalidCheckpoint(format!(
                "expected {} metrics entries for round {}, got {}",
                checkpoint.round + 1,
                checkpoint.round,
                checkpoint.metrics.len()
            )));
        }

        let mut sim = Self::new(config, mode)?;
        sim.round = checkpoint.round;
        sim.beliefs =
            checkpoint.beliefs.into_iter().map(EstimateVector::new).collect();
        sim.metrics = checkpoint.metrics;
        sim.exit = None;
        sim.update_exit();
        Ok(sim)
    }

    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint {
            scenario: self.config.name().to_string(),
            round: self.round,
            beliefs: self.beliefs.iter().map(|b| b.values.clone()).collect(),
            metrics: self.metrics.clone(),
        }
    }

    pub fn round(&self) -> u64 {
        self.round
    }

    pub fn beliefs(&self) -> &[EstimateVector] {
        &self.beliefs
    }

    pub fn metrics(&self) -> &[Metrics] {
        &self.metrics
    }

    pub fn finished(&self) -> Option<ExitReason> {
        self.exit
    }

    /// Execute one round. No-op once the run has finished.
    pub fn advance(&mut self) -> Result<(), SimError> {
        if self.exit.is_some() {
            return Ok(());
        }
        let flags = self.step_round()?;
        self.round += 1;
        let m = self.measure(flags);
        self.metrics.push(m);
        self.update_exit();
        Ok(())
    }

    pub fn run_to_end(mut self) -> Result<RunOutcome, SimError> {
        while self.exit.is_none() {
            self.advance()?;
        }
        Ok(self.into_outcome())
    }

    pub fn into_outcome(self) -> RunOutcome {
        let exit = self.exit.unwrap_or(ExitReason::MaxIters);
        let actions = stack_truth(&self.beliefs, self.config.dims());
        RunOutcome {
            scenario: self.config.name().to_string(),
            exit,
            rounds_run: self.round,
            metrics: self.metrics,
            final_beliefs: self.beliefs,
            final_actions: ActionProfile::new(actions),
            ne_oracle: self.ne,
            recorded: self.recorded,
        }
    }

    fn update_exit(&mut self) {
        let last = self.metrics.last().expect("metrics never empty");
        if self.ne.is_some() && last.dist_to_ne <= self.config.run_settings().tol {
            self.exit = Some(ExitReason::Converged { round: self.round });
        } else if self.round >= self.config.run_settings().max_iters {
            self.exit = Some(ExitReason::MaxIters);
        }
    }

    fn measure(&self, flags: u64) -> Metrics {
        let dims = self.config.dims();
        let truth = stack_truth(&self.beliefs, dims);
        let dist_to_ne = match &self.ne {
            Some(ne) => self
                .beliefs
                .iter()
                .enumerate()
                .map(|(i, b)| {
                    let r = dims.range(i);
                    b.values[r.clone()]
                        .iter()
                        .zip(&ne.as_slice()[r])
                        .map(|(a, x)| (a - x) * (a - x))
                        .sum::<f64>()
                })
                .sum::<f64>()
                .sqrt(),
            None => f64::NAN,
        };
        let consensus_err = self
            .beliefs
            .iter()
            .enumerate()
            .filter(|(i, _)| !self.is_adversary[*i])
            .flat_map(|(_, b)| {
                b.values.iter().zip(&truth).map(|(z, t)| (z - t).abs())
            })
            .fold(0.0, f64::max);
        Metrics { round: self.round, dist_to_ne, consensus_err, assumption_flags: flags }
    }

    /// One communication-and-update round. Returns the number of fallback
    /// events.
    fn step_round(&mut self) -> Result<u64, SimError> {
        let config = self.config;
        let dims = config.dims();
        let n = config.num_agents();
        let total = dims.total();
        let d = config.filter().d;
        let recording = self.recorded.is_some();
        let round = self.round;

        let truth = stack_truth(&self.beliefs, dims);
        let mut flags = 0u64;
        let mut new_beliefs: Vec<EstimateVector> = Vec::with_capacity(n);
        let mut all_rows: Vec<Vec<Vec<f64>>> = Vec::new();
        let mut stacked_v: Vec<f64> = if recording { vec![0.0; n * total] } else { Vec::new() };

        for i in 0..n {
            let mut messages = Vec::new();
            for &j in config.communication.in_neighbors(i) {
                let payload = match config.adversary_policy(j) {
                    Some(policy) => {
                        let mut stream = self.rng.stream(
                            Stream::AdversaryPolicy,
                            round,
                            i as u64,
                            j as u64,
                        );
                        adversary::corrupt_outgoing(
                            policy,
                            &self.beliefs[j].values,
                            dims.range(j),
                            &mut stream,
                        )
                    }
                    None => Some(self.beliefs[j].values.clone()),
                };
                if let Some(values) = payload {
                    messages.push(Message { sender: j, values });
                }
            }
            let batch = MessageBatch::new(i, messages, total)?;
            let batch =
                adversary::apply_channel_attacks(batch, config.attacks(), round, &self.rng)?;
            let observed = config.observation.in_neighbors(i);

            let (belief, rows) = if self.is_adversary[i] {
                self.update_adversary(i, &batch, observed, &truth, &mut flags, recording)?
            } else if batch.len() < 2 * d + 1 {
                flags += 1;
                self.update_from_own_belief(i, observed, &truth, recording)?
            } else {
                self.update_truthful(i, &batch, observed, &truth, recording)?
            };
            if recording {
                let (rows, v) = rows.expect("recording path always produces rows");
                stacked_v[i * total..(i + 1) * total].copy_from_slice(&v);
                all_rows.push(rows);
            }
            new_beliefs.push(belief);
        }

        if let Some(rec) = self.recorded.as_mut() {
            rec.wbars.push(assemble_wbar(dims, round, &all_rows)?);
            rec.filtered_states.push(stacked_v);
        }
        self.beliefs = new_beliefs;
        Ok(flags)
    }

    /// Trim, average, override, and descend for one truthful agent. With
    /// recording on, also emit per-coordinate weight rows whose support is
    /// truthful: retained adversarial values are rewritten onto bracketing
    /// truthful values.
    #[allow(clippy::type_complexity)]
    fn update_truthful(
        &self,
        i: usize,
        batch: &MessageBatch,
        observed: &[usize],
        truth: &[f64],
        recording: bool,
    ) -> Result<(EstimateVector, Option<(Vec<Vec<f64>>, Vec<f64>)>), SimError> {
        let config = self.config;
        let dims = config.dims();
        let n = config.num_agents();
        let total = dims.total();
        let alpha = config.run_settings().alpha;
        let d = config.filter().d;

        if !recording {
            let mut v = protocol::prune_and_average(&self.beliefs[i], batch, d);
            protocol::apply_observation_override(&mut v, dims, observed, truth);
            protocol::gradient_update(&config.game, i, &mut v, alpha)?;
            return Ok((EstimateVector::new(v), None));
        }

        let (mut v, traces) = protocol::prune_and_average_traced(&self.beliefs[i], batch, d);
        protocol::apply_observation_override(&mut v, dims, observed, truth);

        let mut rows = Vec::with_capacity(total);
        for (c, trace) in traces.iter().enumerate() {
            let owner = dims.owner(c);
            if observed.binary_search(&owner).is_ok() {
                rows.push(selector_row(n, owner));
                continue;
            }
            let retained: Vec<(usize, f64)> = batch
                .messages
                .iter()
                .filter(|m| trace.retained.binary_search(&m.sender).is_ok())
                .map(|m| (m.sender, m.values[c]))
                .collect();
            let pool: Vec<(usize, f64)> = batch
                .messages
                .iter()
                .filter(|m| !self.is_adversary[m.sender])
                .map(|m| (m.sender, m.values[c]))
                .collect();
            rows.push(protocol::truthful_equivalent_row(
                n,
                i,
                c,
                self.beliefs[i].values[c],
                &retained,
                &pool,
                &self.is_adversary,
            )?);
        }

        let recorded_v = v.clone();
        protocol::gradient_update(&config.game, i, &mut v, alpha)?;
        Ok((EstimateVector::new(v), Some((rows, recorded_v))))
    }

    /// The fallback update: keep the previous belief, override observed
    /// blocks, and take the usual gradient step. Used by truthful agents
    /// with a sub-threshold inbox and by starved adversaries.
    #[allow(clippy::type_complexity)]
    fn update_from_own_belief(
        &self,
        i: usize,
        observed: &[usize],
        truth: &[f64],
        recording: bool,
    ) -> Result<(EstimateVector, Option<(Vec<Vec<f64>>, Vec<f64>)>), SimError> {
        let config = self.config;
        let dims = config.dims();
        let alpha = config.run_settings().alpha;
        let mut v = self.beliefs[i].values.clone();
        protocol::apply_observation_override(&mut v, dims, observed, truth);
        let rows = recording.then(|| {
            let n = config.num_agents();
            let rows = (0..dims.total())
                .map(|c| {
                    let owner = dims.owner(c);
                    if observed.binary_search(&owner).is_ok() {
                        selector_row(n, owner)
                    } else {
                        selector_row(n, i)
                    }
                })
                .collect();
            (rows, v.clone())
        });
        protocol::gradient_update(&config.game, i, &mut v, alpha)?;
        Ok((EstimateVector::new(v), rows))
    }

    /// An adversarial agent's own belief update: rational play from the
    /// truthful part of its delivered inbox.
    #[allow(clippy::type_complexity)]
    fn update_adversary(
        &self,
        i: usize,
        batch: &MessageBatch,
        observed: &[usize],
        truth: &[f64],
        flags: &mut u64,
        recording: bool,
    ) -> Result<(EstimateVector, Option<(Vec<Vec<f64>>, Vec<f64>)>), SimError> {
        let config = self.config;
        let dims = config.dims();
        let total = dims.total();
        let alpha = config.run_settings().alpha;
        let truthful: Vec<Message> = batch
            .messages
            .iter()
            .filter(|m| !self.is_adversary[m.sender])
            .cloned()
            .collect();
        if truthful.is_empty() {
            *flags += 1;
            return self.update_from_own_belief(i, observed, truth, recording);
        }
        let truthful_batch = MessageBatch { receiver: i, messages: truthful };

        if !recording {
            let belief = adversary::adversary_update(
                &config.game,
                i,
                &truthful_batch,
                observed,
                truth,
                alpha,
            )?;
            return Ok((belief, None));
        }

        // Mirror adversary_update but keep the pre-gradient state and the
        // equivalent rows: uniform over truthful senders, selectors on
        // observed blocks.
        let mut v = vec![0.0; total];
        for m in &truthful_batch.messages {
            for (slot, x) in v.iter_mut().zip(&m.values) {
                *slot += x;
            }
        }
        let count = truthful_batch.len() as f64;
        for slot in v.iter_mut() {
            *slot /= count;
        }
        protocol::apply_observation_override(&mut v, dims, observed, truth);

        let n = config.num_agents();
        let w = 1.0 / count;
        let mut uniform = vec![0.0; n];
        for m in &truthful_batch.messages {
            uniform[m.sender] = w;
        }
        let rows = (0..total)
            .map(|c| {
                let owner = dims.owner(c);
                if observed.binary_search(&owner).is_ok() {
                    selector_row(n, owner)
                } else {
                    uniform.clone()
                }
            })
            .collect();

        let recorded_v = v.clone();
        protocol::gradient_update(&config.game, i, &mut v, alpha)?;
        Ok((EstimateVector::new(v), Some((rows, recorded_v))))
    }
}

/// The true action profile: every agent's own block of its own belief.
fn stack_truth(beliefs: &[EstimateVector], dims: &Dims) -> Vec<f64> {
    let mut truth = vec![0.0; dims.total()];
    for (agent, belief) in beliefs.iter().enumerate() {
        let r = dims.range(agent);
        truth[r.clone()].copy_from_slice(&belief.values[r]);
    }
    truth
}

fn selector_row(n: usize, agent: usize) -> Vec<f64> {
    let mut row = vec![0.0; n];
    row[agent] = 1.0;
    row
}

fn initial_beliefs(config: &ScenarioConfig, rng: &ScenarioRng) -> Vec<EstimateVector> {
    let n = config.num_agents();
    let total = config.dims().total();
    match &config.run_settings().init {
        InitSpec::Zeros => (0..n).map(|_| EstimateVector::zeros(total)).collect(),
        InitSpec::Gaussian { std } => (0..n)
            .map(|agent| {
                let mut stream = rng.stream(Stream::Init, 0, agent as u64, 0);
                let values = (0..total)
                    .map(|_| std * stream.sample::<f64, _>(StandardNormal))
                    .collect();
                EstimateVector::new(values)
            })
            .collect(),
        InitSpec::Explicit { beliefs } => {
            beliefs.iter().map(|b| EstimateVector::new(b.clone())).collect()
        }
    }
}

/// Long-format CSV for a finished run: `round,agent,metric,value`. Global
/// per-round metrics use `*` in the agent column; final per-agent rows
/// report each agent's belief deviation from the final true actions and,
/// when an oracle exists, its action's distance to equilibrium.
pub fn metrics_csv(outcome: &RunOutcome) -> String {
    let mut out = String::from("round,agent,metric,value\n");
    for m in &outcome.metrics {
        out.push_str(&format!("{},*,dist_to_ne,{}\n", m.round, m.dist_to_ne));
        out.push_str(&format!("{},*,consensus_err,{}\n", m.round, m.consensus_err));
        out.push_str(&format!("{},*,assumption_flags,{}\n", m.round, m.assumption_flags));
    }
    let last = outcome.rounds_run;
    let truth = outcome.final_actions.as_slice();
    for (agent, belief) in outcome.final_beliefs.iter().enumerate() {
        let dev = belief
            .values
            .iter()
            .zip(truth)
            .map(|(z, t)| (z - t).abs())
            .fold(0.0, f64::max);
        out.push_str(&format!("{last},{agent},final_belief_dev,{dev}\n"));
    }
    out
}
