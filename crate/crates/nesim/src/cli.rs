//! Command-line interface. The `nesim` binary is a thin wrapper over the
//! library: `run` simulates a scenario, `check-graph` verifies the
//! convergence guarantee's graph assumptions, `step-size` certifies step
//! sizes, `oracle` solves for the centralized equilibrium, and `analyze`
//! replays a scenario while recording weight matrices and evaluates the
//! contraction bounds on them.
//!
//! Exit codes: 0 on success (and for `check-graph`, when the property
//! holds), 1 on failure or error, 2 when a check is inconclusive (network
//! too large for an exhaustive check, or only a sampled search ran).

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::analysis::{
    finite_horizon_P, lyapunov_value, max_feasible_alpha, step_size_test, AnalysisError,
    ProjectionA, TheoryConstants,
};
use crate::game::GameError;
use crate::graph::{
    check_assumptions, is_information_robust_sampled, locality_number, DirectedGraph,
    GraphError, RobustnessReport,
};
use crate::scenario::{self, builtin_names, ScenarioConfig, ScenarioError};
use crate::sim::{self, AssumptionMode, Checkpoint, ExitReason, SimError, Simulation};

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error("failed to write `{path}`: {source}")]
    Write {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Usage(String),
}

#[derive(Parser)]
#[command(
    name = "nesim",
    version,
    about = "Simulate and analyze resilient distributed Nash equilibrium seeking"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a scenario and report convergence metrics.
    Run(RunArgs),
    /// Verify the graph assumptions behind the convergence guarantee.
    CheckGraph(CheckGraphArgs),
    /// Evaluate step-size feasibility and the largest certified step.
    StepSize(StepSizeArgs),
    /// Solve for the centralized Nash equilibrium and the game constants.
    Oracle(OracleArgs),
    /// Record a run's weight matrices and check the contraction bounds.
    Analyze(AnalyzeArgs),
}

#[derive(Args)]
struct ScenarioArgs {
    /// Built-in scenario name or path to a scenario JSON file.
    #[arg(long)]
    scenario: String,
    /// Override a scenario field by dotted path, e.g. --set run.alpha=0.01.
    /// May be given multiple times; values are parsed as JSON.
    #[arg(long = "set", value_name = "PATH=VALUE")]
    set: Vec<String>,
    /// Shorthand for --set run.seed=SEED, applied after all --set overrides.
    #[arg(long)]
    seed: Option<u64>,
}

impl ScenarioArgs {
    fn overrides(&self) -> Result<Vec<(String, String)>, CliError> {
        let mut pairs = Vec::new();
        for raw in &self.set {
            let (path, value) = raw.split_once('=').ok_or_else(|| {
                CliError::Usage(format!("--set expects PATH=VALUE, got `{raw}`"))
            })?;
            pairs.push((path.to_string(), value.to_string()));
        }
        if let Some(seed) = self.seed {
            pairs.push(("run.seed".to_string(), seed.to_string()));
        }
        Ok(pairs)
    }

    fn load(&self) -> Result<ScenarioConfig, CliError> {
        let text = if builtin_names().contains(&self.scenario.as_str()) {
            scenario::builtin_file(&self.scenario)?.to_json_string()?
        } else if std::path::Path::new(&self.scenario).exists() {
            std::fs::read_to_string(&self.scenario).map_err(|source| {
                ScenarioError::Io { path: self.scenario.clone(), source }
            })?
        } else {
            return Err(CliError::Usage(format!(
                "`{}` is neither a built-in scenario ({}) nor an existing file",
                self.scenario,
                builtin_names().join(", ")
            )));
        };
        Ok(ScenarioConfig::from_json_str_with_overrides(&text, &self.overrides()?)?)
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// Write per-round metrics as CSV (`round,agent,metric,value`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Run even if the graph assumptions fail or cannot be checked.
    #[arg(long)]
    permissive: bool,
    /// Verify the graph assumptions before running (the default).
    #[arg(long, conflicts_with = "permissive")]
    strict: bool,
    /// Resume from a checkpoint file written by --save-checkpoint.
    #[arg(long)]
    resume: Option<PathBuf>,
    /// Write the final state as a resumable checkpoint.
    #[arg(long)]
    save_checkpoint: Option<PathBuf>,
}

#[derive(Args)]
struct CheckGraphArgs {
    /// Built-in scenario name or scenario JSON path to take the graphs,
    /// adversary roster, and filter parameter from.
    #[arg(long, conflicts_with_all = ["communication", "observation"])]
    scenario: Option<String>,
    #[arg(long = "set", value_name = "PATH=VALUE", requires = "scenario")]
    set: Vec<String>,
    /// Communication graph file (JSON or `nodes N` / `i <- j` text).
    #[arg(long, requires = "observation", requires = "d")]
    communication: Option<PathBuf>,
    /// Observation graph file.
    #[arg(long)]
    observation: Option<PathBuf>,
    /// Filter parameter d (the guarantee needs (2d+1)-information robustness).
    #[arg(long)]
    d: Option<usize>,
    /// Comma-separated adversarial node indices, e.g. --adversaries 3,6,12.
    #[arg(long, value_delimiter = ',')]
    adversaries: Vec<usize>,
    /// Replace the exhaustive information-robustness search with this many
    /// random subsets per node. A pass is then inconclusive (exit 2).
    #[arg(long, value_name = "TRIALS")]
    sampled: Option<usize>,
    /// Seed for --sampled.
    #[arg(long, default_value_t = 0)]
    sample_seed: u64,
}

#[derive(Args)]
struct StepSizeArgs {
    /// Take agent count, weight floor, and game constants from a scenario.
    #[arg(long)]
    scenario: Option<String>,
    #[arg(long = "set", value_name = "PATH=VALUE", requires = "scenario")]
    set: Vec<String>,
    /// Number of agents (with --eta/--mu/--lipschitz instead of --scenario).
    #[arg(long)]
    agents: Option<usize>,
    /// Lower bound on nonzero averaging weights.
    #[arg(long)]
    eta: Option<f64>,
    /// Strong-monotonicity modulus of the pseudo-gradient.
    #[arg(long)]
    mu: Option<f64>,
    /// Lipschitz modulus of the pseudo-gradient.
    #[arg(long)]
    lipschitz: Option<f64>,
    /// Test this step size; exit 1 if it is not certified.
    #[arg(long)]
    alpha: Option<f64>,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// Write the equilibrium and constants as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// Number of rounds to record (default: the scenario's max_iters,
    /// capped at 200).
    #[arg(long)]
    rounds: Option<u64>,
    /// Tail tolerance for the truncated weight-matrix sums.
    #[arg(long, default_value_t = 1e-9)]
    tail_tol: f64,
    /// Maximum summation horizon per round.
    #[arg(long, default_value_t = 20_000)]
    horizon: usize,
}

/// Parse arguments and dispatch; returns the process exit code.
pub fn main() -> i32 {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::CheckGraph(args) => cmd_check_graph(args),
        Command::StepSize(args) => cmd_step_size(args),
        Command::Oracle(args) => cmd_oracle(args),
        Command::Analyze(args) => cmd_analyze(args),
    };
    match result {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            let mut source = std::error::Error::source(&err);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            1
        }
    }
}

fn write_file(path: &PathBuf, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|source| CliError::Write {
        path: path.display().to_string(),
        source,
    })
}

fn cmd_run(args: RunArgs) -> Result<i32, CliError> {
    let config = args.scenario.load()?;
    let mode = if args.permissive { AssumptionMode::Permissive } else { AssumptionMode::Strict };

    let mut simulation = match args.resume {
        Some(path) => Simulation::resume(&config, mode, Checkpoint::load(path)?)?,
        None => Simulation::new(&config, mode)?,
    };
    let max_iters = config.run_settings().max_iters;
    let progress_every = (max_iters / 10).max(1);
    while simulation.finished().is_none() {
        simulation.advance()?;
        if simulation.round() % progress_every == 0 {
            let m = simulation.metrics().last().expect("metrics nonempty");
            log::info!(
                "round {}: dist_to_ne {:.3e}, consensus_err {:.3e}",
                m.round,
                m.dist_to_ne,
                m.consensus_err
            );
        }
    }
    let checkpoint = args.save_checkpoint.as_ref().map(|_| simulation.checkpoint());
    let outcome = simulation.into_outcome();

    let last = outcome.metrics.last().expect("metrics nonempty");
    match outcome.exit {
        ExitReason::Converged { round } => {
            println!("{}: converged at round {round}", outcome.scenario);
        }
        ExitReason::MaxIters => {
            println!(
                "{}: tolerance not reached after {} rounds",
                outcome.scenario, outcome.rounds_run
            );
        }
    }
    println!(
        "final dist_to_ne {:.6e}, consensus_err {:.6e}, fallback events {}",
        last.dist_to_ne,
        last.consensus_err,
        outcome.metrics.iter().map(|m| m.assumption_flags).sum::<u64>()
    );

    if let Some(path) = &args.out {
        write_file(path, &sim::metrics_csv(&outcome))?;
        println!("metrics written to {}", path.display());
    }
    if let (Some(path), Some(cp)) = (&args.save_checkpoint, checkpoint) {
        cp.save(path)?;
        println!("checkpoint written to {}", path.display());
    }
    Ok(0)
}

fn report_exit_code(report: &RobustnessReport) -> i32 {
    if !report.holds {
        1
    } else if report.note.is_some() {
        2
    } else {
        0
    }
}

fn cmd_check_graph(args: CheckGraphArgs) -> Result<i32, CliError> {
    let (communication, observation, adversaries, d) = if let Some(name) = &args.scenario {
        let scenario_args =
            ScenarioArgs { scenario: name.clone(), set: args.set.clone(), seed: None };
        let config = scenario_args.load()?;
        (
            config.communication.clone(),
            config.observation.clone(),
            config.adversary_agents(),
            config.filter().d,
        )
    } else {
        let (Some(gc_path), Some(go_path), Some(d)) =
            (&args.communication, &args.observation, args.d)
        else {
            return Err(CliError::Usage(
                "provide either --scenario or all of --communication, --observation, --d"
                    .into(),
            ));
        };
        (
            scenario::load_graph_file(gc_path)?,
            scenario::load_graph_file(go_path)?,
            args.adversaries.clone(),
            d,
        )
    };

    let report = if let Some(trials) = args.sampled {
        sampled_assumption_report(
            &communication,
            &observation,
            &adversaries,
            d,
            trials,
            args.sample_seed,
        )?
    } else {
        match check_assumptions(&communication, &observation, &adversaries, d) {
            Ok(report) => report,
            Err(GraphError::TooLarge(msg)) => {
                println!("inconclusive: {msg}; rerun with --sampled TRIALS");
                return Ok(2);
            }
            Err(e) => return Err(e.into()),
        }
    };

    println!("{report}");
    Ok(report_exit_code(&report))
}

/// The assumption bundle with the information-robustness clause checked by
/// random search instead of exhaustively: failures are definitive, passes
/// are inconclusive.
fn sampled_assumption_report(
    communication: &DirectedGraph,
    observation: &DirectedGraph,
    adversaries: &[usize],
    d: usize,
    trials: usize,
    seed: u64,
) -> Result<RobustnessReport, CliError> {
    use crate::graph::{ClauseFailure, Property, Witness};

    let n = communication.num_nodes();
    let mut clauses = Vec::new();
    let worst = locality_number(communication, adversaries)?;
    if worst > d {
        let node = (0..n)
            .filter(|i| !adversaries.contains(i))
            .max_by_key(|&i| {
                communication
                    .in_neighbors(i)
                    .iter()
                    .filter(|&&j| adversaries.contains(&j))
                    .count()
            })
            .unwrap_or(0);
        clauses.push(ClauseFailure::LocalityExceeded { allowed: d, found: worst, node });
    }
    let required = 2 * d + 1;
    for i in (0..n).filter(|i| !adversaries.contains(i)) {
        let degree = communication.in_degree(i);
        if degree < required {
            clauses.push(ClauseFailure::InDegreeTooSmall { node: i, degree, required });
        }
    }
    for node in 0..n {
        let sub =
            is_information_robust_sampled(communication, observation, node, required, trials, seed)?;
        if !sub.holds {
            if let Some(Witness::ViolatingSet(set)) = sub.witness {
                clauses.push(ClauseFailure::NotInformationRobust {
                    node,
                    required_r: required,
                    violating_set: set,
                });
            }
        }
    }

    let holds = clauses.is_empty();
    Ok(RobustnessReport {
        property: Property::Assumptions { d },
        holds,
        witness: if holds { None } else { Some(Witness::Clauses(clauses)) },
        note: holds.then(|| {
            format!("information robustness sampled with {trials} trials per node, not proven")
        }),
    })
}

fn cmd_step_size(args: StepSizeArgs) -> Result<i32, CliError> {
    let (n_agents, eta, mu, lipschitz) = if let Some(name) = &args.scenario {
        let scenario_args =
            ScenarioArgs { scenario: name.clone(), set: args.set.clone(), seed: None };
        let config = scenario_args.load()?;
        let (mu, l) = config.game.estimate_constants()?;
        (
            args.agents.unwrap_or(config.num_agents()),
            args.eta.unwrap_or(config.filter().eta),
            args.mu.unwrap_or(mu),
            args.lipschitz.unwrap_or(l),
        )
    } else {
        let (Some(agents), Some(eta), Some(mu), Some(lipschitz)) =
            (args.agents, args.eta, args.mu, args.lipschitz)
        else {
            return Err(CliError::Usage(
                "provide either --scenario or all of --agents, --eta, --mu, --lipschitz"
                    .into(),
            ));
        };
        (agents, eta, mu, lipschitz)
    };

    let tc = TheoryConstants::new(n_agents, eta, mu, lipschitz)?;
    println!(
        "agents {}, eta {}, mu {}, L {}",
        tc.n_agents, tc.eta, tc.mu, tc.l
    );
    println!("transition contraction C = {:.12}, pbar = {:.12}", tc.c, tc.pbar);
    match max_feasible_alpha(&tc) {
        Ok(max_alpha) => println!("max certified step size: {max_alpha:.6e}"),
        Err(AnalysisError::Domain(reason)) => {
            println!("no step size is certified at this size: {reason}");
            println!(
                "(the worst-case bound pbar = 4N / (1 - C^(2/(N-1))) is vacuous here)"
            );
            if args.alpha.is_some() {
                return Ok(1);
            }
            return Ok(0);
        }
        Err(e) => return Err(e.into()),
    }

    if let Some(alpha) = args.alpha {
        let report = step_size_test(&tc, alpha);
        println!(
            "alpha {alpha:.6e}: {} (leading minor {:.6e}, determinant {:.6e})",
            if report.feasible { "certified" } else { "NOT certified" },
            report.leading_minor,
            report.determinant
        );
        return Ok(if report.feasible { 0 } else { 1 });
    }
    Ok(0)
}

fn cmd_oracle(args: OracleArgs) -> Result<i32, CliError> {
    let config = args.scenario.load()?;
    let ne = config.game.solve_ne_oracle()?;
    let (mu, l) = config.game.estimate_constants()?;
    let dims = config.dims();

    println!("{}: centralized Nash equilibrium", config.name());
    for agent in 0..config.num_agents() {
        let block = &ne.as_slice()[dims.range(agent)];
        println!("  agent {agent}: {block:?}");
    }
    println!("mu {mu:.12}, L {l:.12}");

    if let Some(path) = &args.out {
        let doc = serde_json::json!({
            "scenario": config.name(),
            "x_star": ne.as_slice(),
            "mu": mu,
            "l": l,
        });
        write_file(path, &serde_json::to_string_pretty(&doc).expect("json"))?;
    }
    Ok(0)
}

fn cmd_analyze(args: AnalyzeArgs) -> Result<i32, CliError> {
    let rounds = args.rounds;
    let mut scenario_args = args.scenario;
    scenario_args.set.push("run.record_weights=true".into());
    scenario_args.set.push("run.tol=0.0".into());
    let config = scenario_args.load()?;
    let rounds = rounds
        .unwrap_or_else(|| config.run_settings().max_iters.min(200))
        .max(1);

    let mut simulation = Simulation::new(&config, AssumptionMode::Permissive)?;
    while simulation.finished().is_none() && simulation.round() < rounds {
        simulation.advance()?;
    }
    let outcome = simulation.into_outcome();
    let recorded = outcome.recorded.as_ref().expect("recording was enabled");
    println!(
        "{}: recorded {} rounds of weight matrices",
        outcome.scenario,
        recorded.wbars.len()
    );

    let (mu, l) = config.game.estimate_constants()?;
    let tc = TheoryConstants::new(config.num_agents(), config.filter().eta, mu, l)?;
    let projection = ProjectionA::new(config.dims());
    let pseq = match finite_horizon_P(&recorded.wbars, &projection, args.tail_tol, args.horizon) {
        Ok(pseq) => pseq,
        Err(AnalysisError::NotConverged { tail, horizon }) => {
            println!(
                "weight-matrix products do not contract to the consensus projector \
                 (tail {tail:.3e} after {horizon} factors): the run violates the \
                 convergence assumptions; see `nesim check-graph`"
            );
            return Ok(1);
        }
        Err(e) => return Err(e.into()),
    };

    // Eigenvalue bound: every P[k] must stay below pbar.
    let mut max_eig: f64 = 0.0;
    for p in &pseq.p {
        let eigs = p.clone().symmetric_eigen().eigenvalues;
        max_eig = max_eig.max(eigs.iter().copied().fold(0.0, f64::max));
    }
    println!(
        "largest P eigenvalue {:.6} vs pbar {:.6}: bound {}",
        max_eig,
        tc.pbar,
        if max_eig <= tc.pbar { "holds" } else { "VIOLATED" }
    );

    // Defining recursion: Wbar[k]' P[k+1] Wbar[k] = P[k] - (I-A)'(I-A).
    let a = projection.matrix();
    let eye = nalgebra::DMatrix::<f64>::identity(a.nrows(), a.ncols());
    let ia = &eye - &a;
    let iata = ia.transpose() * &ia;
    let mut max_residual: f64 = 0.0;
    for (k, w) in recorded.wbars.iter().enumerate() {
        let lhs = w.matrix.transpose() * &pseq.p[k + 1] * &w.matrix;
        let rhs = &pseq.p[k] - &iata;
        let residual = (&lhs - &rhs).abs().max();
        max_residual = max_residual.max(residual);
    }
    println!("recursion residual (max abs entry): {max_residual:.3e}");
    let max_tail = pseq.tails.iter().copied().fold(0.0, f64::max);
    println!("largest truncation tail: {max_tail:.3e}");

    // Lyapunov trajectory on the recorded filtered states.
    match config.game.solve_ne_oracle() {
        Ok(x_star) => {
            let values: Vec<f64> = recorded
                .filtered_states
                .iter()
                .enumerate()
                .map(|(k, v)| lyapunov_value(&pseq.p[k + 1], &projection, v, x_star.as_slice()))
                .collect();
            let decreasing = values
                .windows(2)
                .filter(|w| w[0] > 1e-12)
                .all(|w| w[1] < w[0]);
            println!(
                "Lyapunov value: first {:.6e}, last {:.6e}, strictly decreasing above 1e-12: {}",
                values.first().copied().unwrap_or(f64::NAN),
                values.last().copied().unwrap_or(f64::NAN),
                if decreasing { "yes" } else { "no" }
            );
        }
        Err(GameError::UnsupportedGame) => {
            println!("Lyapunov trajectory skipped: no equilibrium oracle for this game");
        }
        Err(e) => return Err(e.into()),
    }

    Ok(if max_eig <= tc.pbar { 0 } else { 1 })
}
