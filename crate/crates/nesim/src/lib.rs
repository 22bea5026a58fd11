//! Simulator and analysis toolkit for resilient distributed Nash equilibrium
//! seeking over directed communication graphs.
//!
//! Agents play a game with strongly monotone pseudo-gradient. Each agent keeps
//! a belief vector estimating the whole action profile, exchanges beliefs with
//! its in-neighbors on a communication graph, screens the received values with
//! a per-component trimmed filter, overrides components it can observe
//! directly on an observation graph, and descends its own cost along its own
//! action block. The toolkit simulates that protocol under configurable
//! adversaries and channel attacks, checks the graph assumptions the
//! convergence guarantee needs, and evaluates the guarantee's constants
//! (contraction factor, weight-matrix Lyapunov bound, feasible step sizes)
//! on recorded runs.
//!
//! The `examples/` directory is the front door: each example is a runnable
//! walkthrough of one capability (baseline convergence, attack screening,
//! assumption checking, step-size certification, weight-matrix analysis, the
//! cut-vertex counterexample, the 96-robot formation scenario). A thin `nesim`
//! binary exposes the same flows as subcommands for scripting.
//!
//! # Example
//!
//! ```
//! use nesim::scenario;
//! use nesim::sim::{run, AssumptionMode};
//!
//! let config = scenario::builtin("baseline-noadv-8").unwrap();
//! let outcome = run(&config, AssumptionMode::Permissive).unwrap();
//! assert!(outcome.metrics.last().unwrap().dist_to_ne < 1e-8);
//! ```

pub mod adversary;
pub mod analysis;
pub mod cli;
pub mod game;
pub mod graph;
pub mod protocol;
pub mod rng;
pub mod scenario;
pub mod sim;

pub use adversary::{AdversaryPolicy, ChannelAttack};
pub use analysis::{ProjectionA, StackedWeightMatrix, TheoryConstants};
pub use game::{ActionProfile, CostEdge, Dims, GameSpec};
pub use graph::{DirectedGraph, RobustnessReport};
pub use protocol::{EstimateVector, FilterConfig, MessageBatch};
pub use scenario::{ScenarioConfig, ScenarioFile};
pub use sim::{AssumptionMode, Metrics, RunOutcome};
