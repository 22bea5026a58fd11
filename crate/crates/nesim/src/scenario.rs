//! Scenario files: a complete experiment description in one JSON document.
//!
//! A scenario bundles the game, the communication and observation graphs,
//! the filter parameters, the adversary roster, channel attacks, and run
//! settings. [`ScenarioFile`] is the serde-facing schema (strict: unknown
//! keys are rejected); [`ScenarioConfig`] is the validated runtime form the
//! simulator consumes. Six built-in scenarios ship with the crate and are
//! available by name through [`builtin`].

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::adversary::{AdversaryPolicy, ChannelAttack};
use crate::game::{CostEdge, Dims, GameError, GameSpec};
use crate::graph::{DirectedGraph, GraphError};
use crate::protocol::FilterConfig;

/// Largest stacked dimension (`num_agents * total_action_dim`) for which
/// per-round weight-matrix recording is allowed. Recording stores one dense
/// matrix per round, so this keeps memory proportional to run length, not
/// quadratic in network size.
pub const MAX_RECORDED_STATE: usize = 128;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("failed to read `{path}`: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid scenario JSON: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error("unknown builtin scenario `{name}`; available: {available}")]
    UnknownBuiltin { name: String, available: String },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Game(#[from] GameError),
}

/// A directed graph as stored in scenario JSON: node count plus a list of
/// `[to, from]` pairs, each meaning an edge from `from` to `to`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphFile {
    pub num_nodes: usize,
    pub edges: Vec<(usize, usize)>,
}

impl GraphFile {
    pub fn from_graph(graph: &DirectedGraph) -> Self {
        Self { num_nodes: graph.num_nodes(), edges: graph.edges() }
    }

    pub fn build(&self) -> Result<DirectedGraph, GraphError> {
        DirectedGraph::new(self.num_nodes, &self.edges)
    }
}

/// The pair of graphs a scenario runs on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphsFile {
    /// Who sends estimate messages to whom.
    pub communication: GraphFile,
    /// Whose true actions each agent observes directly. Must contain every
    /// self-loop: an agent always knows its own action.
    pub observation: GraphFile,
}

/// Serializable game description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GameFile {
    /// `J_i(x) = ½ xᵀ (block row i of g) x + b_iᵀ x` style affine
    /// pseudo-gradient game: the stacked pseudo-gradient is `g x + b`.
    QuadraticAffine { sizes: Vec<usize>, g: Vec<Vec<f64>>, b: Vec<f64> },
    /// Planar formation game: each agent pays a mean-field tracking term
    /// toward `target` plus `½‖x_to − x_from − offset‖²` per cost edge.
    SensorNetwork { num_agents: usize, target: [f64; 2], cost_edges: Vec<CostEdge> },
}

impl GameFile {
    pub fn build(&self) -> Result<GameSpec, ScenarioError> {
        match self {
            Self::QuadraticAffine { sizes, g, b } => {
                let dims = Dims::new(sizes.clone())?;
                let total = dims.total();
                if g.len() != total || g.iter().any(|row| row.len() != total) {
                    return Err(ScenarioError::Invalid(format!(
                        "quadratic_affine matrix must be {total}x{total} to match sizes {sizes:?}"
                    )));
                }
                let flat: Vec<f64> = g.iter().flatten().copied().collect();
                let g = DMatrix::from_row_slice(total, total, &flat);
                let b = DVector::from_column_slice(b);
                Ok(GameSpec::quadratic_affine(dims, g, b)?)
            }
            Self::SensorNetwork { num_agents, target, cost_edges } => {
                Ok(GameSpec::sensor_network(*num_agents, *target, cost_edges.clone())?)
            }
        }
    }
}

/// One adversarial agent and the policy it follows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdversaryEntry {
    pub agent: usize,
    pub policy: AdversaryPolicy,
}

/// Initial beliefs for every agent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitSpec {
    /// Every belief starts at the zero vector.
    Zeros,
    /// Every belief component drawn i.i.d. from `N(0, std²)`, seeded from
    /// the run seed so runs are reproducible.
    Gaussian { std: f64 },
    /// Explicit per-agent belief vectors, `beliefs[i]` being agent `i`'s
    /// full stacked estimate.
    Explicit { beliefs: Vec<Vec<f64>> },
}

/// Step size, stopping rules, seeding, and recording switches.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSettings {
    pub alpha: f64,
    pub seed: u64,
    pub max_iters: u64,
    /// Stop once the distance to the equilibrium falls to this value or
    /// below. Use `0.0` to always run the full `max_iters`.
    pub tol: f64,
    pub init: InitSpec,
    /// Record the per-round equivalent weight matrices and filtered states.
    /// Incompatible with jamming and man-in-the-middle attacks, which have
    /// no row-stochastic equivalent.
    #[serde(default)]
    pub record_weights: bool,
}

/// The full on-disk scenario schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub name: String,
    pub game: GameFile,
    pub graphs: GraphsFile,
    pub filter: FilterConfig,
    #[serde(default)]
    pub adversaries: Vec<AdversaryEntry>,
    #[serde(default)]
    pub attacks: Vec<ChannelAttack>,
    pub run: RunSettings,
}

impl ScenarioFile {
    pub fn from_json_str(text: &str) -> Result<Self, ScenarioError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json_string(&self) -> Result<String, ScenarioError> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Validate and build the runtime configuration.
    pub fn into_config(self) -> Result<ScenarioConfig, ScenarioError> {
        ScenarioConfig::from_file(self)
    }
}

/// A validated scenario, ready to run. Keeps the originating [`ScenarioFile`]
/// (so it can be re-serialized) next to the built game and graphs.
#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub file: ScenarioFile,
    pub game: GameSpec,
    pub communication: DirectedGraph,
    pub observation: DirectedGraph,
    policies: Vec<Option<AdversaryPolicy>>,
}

impl ScenarioConfig {
    pub fn from_file(file: ScenarioFile) -> Result<Self, ScenarioError> {
        let game = file.game.build()?;
        let n = game.num_agents();
        let dims = game.dims().clone();

        let communication = file.graphs.communication.build()?;
        let observation = file.graphs.observation.build()?;
        if communication.num_nodes() != n || observation.num_nodes() != n {
            return Err(ScenarioError::Invalid(format!(
                "graphs must have {n} nodes to match the game; got communication {} and \
                 observation {}",
                communication.num_nodes(),
                observation.num_nodes()
            )));
        }
        if !observation.has_all_self_loops() {
            return Err(ScenarioError::Invalid(
                "observation graph must contain every self-loop (agents always observe \
                 their own action)"
                    .into(),
            ));
        }
        if let Some(node) = (0..n).find(|&i| communication.has_self_loop(i)) {
            return Err(ScenarioError::Invalid(format!(
                "communication graph must not contain self-loops (found one at node {node})"
            )));
        }

        let eta = file.filter.eta;
        let eta_bound = 1.0 / (communication.max_in_degree() + 1) as f64;
        if !(eta.is_finite() && eta > 0.0) {
            return Err(ScenarioError::Invalid(format!(
                "filter.eta must be positive and finite, got {eta}"
            )));
        }
        if eta > eta_bound {
            return Err(ScenarioError::Invalid(format!(
                "filter.eta = {eta} exceeds 1/(max in-degree + 1) = {eta_bound}; uniform \
                 averaging cannot guarantee that weight floor"
            )));
        }

        let mut policies: Vec<Option<AdversaryPolicy>> = vec![None; n];
        for entry in &file.adversaries {
            if entry.agent >= n {
                return Err(ScenarioError::Invalid(format!(
                    "adversary agent {} out of range for {n} agents",
                    entry.agent
                )));
            }
            if policies[entry.agent].is_some() {
                return Err(ScenarioError::Invalid(format!(
                    "agent {} listed as adversary more than once",
                    entry.agent
                )));
            }
            entry.policy.validate().map_err(ScenarioError::Invalid)?;
            match &entry.policy {
                AdversaryPolicy::ConstantSignal { values } if values.len() != dims.total() => {
                    return Err(ScenarioError::Invalid(format!(
                        "constant_signal for agent {} must have {} values, got {}",
                        entry.agent,
                        dims.total(),
                        values.len()
                    )));
                }
                AdversaryPolicy::SelfishDeceiver { lie_offset }
                    if lie_offset.len() != dims.size(entry.agent) =>
                {
                    return Err(ScenarioError::Invalid(format!(
                        "selfish_deceiver lie_offset for agent {} must have {} values \
                         (its action block), got {}",
                        entry.agent,
                        dims.size(entry.agent),
                        lie_offset.len()
                    )));
                }
                _ => {}
            }
            policies[entry.agent] = Some(entry.policy.clone());
        }

        for attack in &file.attacks {
            attack.validate().map_err(ScenarioError::Invalid)?;
            for (to, from) in attack.edges() {
                if to >= n || from >= n || !communication.has_edge(to, from) {
                    return Err(ScenarioError::Invalid(format!(
                        "attack targets edge {to} <- {from}, which is not in the \
                         communication graph"
                    )));
                }
            }
            if let ChannelAttack::ManInTheMiddle { offset, .. } = attack {
                if offset.len() != dims.total() {
                    return Err(ScenarioError::Invalid(format!(
                        "man_in_the_middle offset must have {} values (full message \
                         length), got {}",
                        dims.total(),
                        offset.len()
                    )));
                }
            }
        }

        let run = &file.run;
        if !(run.alpha.is_finite() && run.alpha > 0.0) {
            return Err(ScenarioError::Invalid(format!(
                "run.alpha must be positive and finite, got {}",
                run.alpha
            )));
        }
        if !(run.tol.is_finite() && run.tol >= 0.0) {
            return Err(ScenarioError::Invalid(format!(
                "run.tol must be nonnegative and finite, got {}",
                run.tol
            )));
        }
        if run.max_iters == 0 {
            return Err(ScenarioError::Invalid("run.max_iters must be at least 1".into()));
        }
        match &run.init {
            InitSpec::Zeros => {}
            InitSpec::Gaussian { std } => {
                if !(std.is_finite() && *std >= 0.0) {
                    return Err(ScenarioError::Invalid(format!(
                        "gaussian init std must be finite and >= 0, got {std}"
                    )));
                }
            }
            InitSpec::Explicit { beliefs } => {
                if beliefs.len() != n {
                    return Err(ScenarioError::Invalid(format!(
                        "explicit init must provide {n} belief vectors, got {}",
                        beliefs.len()
                    )));
                }
                for (agent, belief) in beliefs.iter().enumerate() {
                    if belief.len() != dims.total() {
                        return Err(ScenarioError::Invalid(format!(
                            "explicit init belief for agent {agent} must have {} values, \
                             got {}",
                            dims.total(),
                            belief.len()
                        )));
                    }
                    if belief.iter().any(|v| !v.is_finite()) {
                        return Err(ScenarioError::Invalid(format!(
                            "explicit init belief for agent {agent} contains a non-finite \
                             value"
                        )));
                    }
                }
            }
        }
        if run.record_weights {
            if file.attacks.iter().any(|a| {
                matches!(a, ChannelAttack::Jam { .. } | ChannelAttack::ManInTheMiddle { .. })
            }) {
                return Err(ScenarioError::Invalid(
                    "record_weights cannot be combined with jam or man_in_the_middle \
                     attacks; those corruptions have no row-stochastic equivalent"
                        .into(),
                ));
            }
            let stacked = n * dims.total();
            if stacked > MAX_RECORDED_STATE {
                return Err(ScenarioError::Invalid(format!(
                    "record_weights requires stacked dimension <= {MAX_RECORDED_STATE}, \
                     got {stacked}"
                )));
            }
        }

        Ok(Self { file, game, communication, observation, policies })
    }

    pub fn from_json_str(text: &str) -> Result<Self, ScenarioError> {
        ScenarioFile::from_json_str(text)?.into_config()
    }

    /// Parse JSON after applying dotted-path overrides such as
    /// `("run.alpha", "0.01")`. Values are parsed as JSON, falling back to a
    /// plain string when they are not.
    pub fn from_json_str_with_overrides(
        text: &str,
        overrides: &[(String, String)],
    ) -> Result<Self, ScenarioError> {
        let mut value: serde_json::Value = serde_json::from_str(text)?;
        for (path, raw) in overrides {
            apply_override(&mut value, path, raw)?;
        }
        let file: ScenarioFile = serde_json::from_value(value)?;
        file.into_config()
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self, ScenarioError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json_str(&text)
    }

    pub fn name(&self) -> &str {
        &self.file.name
    }

    pub fn num_agents(&self) -> usize {
        self.game.num_agents()
    }

    pub fn dims(&self) -> &Dims {
        self.game.dims()
    }

    pub fn filter(&self) -> FilterConfig {
        self.file.filter
    }

    pub fn run_settings(&self) -> &RunSettings {
        &self.file.run
    }

    pub fn attacks(&self) -> &[ChannelAttack] {
        &self.file.attacks
    }

    pub fn is_adversary(&self, agent: usize) -> bool {
        self.policies.get(agent).is_some_and(|p| p.is_some())
    }

    pub fn adversary_policy(&self, agent: usize) -> Option<&AdversaryPolicy> {
        self.policies.get(agent).and_then(|p| p.as_ref())
    }

    pub fn adversary_agents(&self) -> Vec<usize> {
        (0..self.num_agents()).filter(|&i| self.is_adversary(i)).collect()
    }
}

/// Set the value at a dotted path inside a JSON document. Path segments
/// index objects by key and arrays by number; the final segment may create a
/// new object key. The raw value is parsed as JSON, falling back to a string.
pub fn apply_override(
    root: &mut serde_json::Value,
    path: &str,
    raw: &str,
) -> Result<(), ScenarioError> {
    let parts: Vec<&str> = path.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(ScenarioError::Invalid(format!("malformed override path `{path}`")));
    }
    let leaf: serde_json::Value = serde_json::from_str(raw)
        .unwrap_or_else(|_| serde_json::Value::String(raw.to_string()));

    let mut cursor = root;
    for (idx, part) in parts.iter().enumerate() {
        let last = idx + 1 == parts.len();
        match cursor {
            serde_json::Value::Object(map) => {
                if last {
                    map.insert((*part).to_string(), leaf);
                    return Ok(());
                }
                cursor = map.get_mut(*part).ok_or_else(|| {
                    ScenarioError::Invalid(format!("override path `{path}`: no key `{part}`"))
                })?;
            }
            serde_json::Value::Array(items) => {
                let i: usize = part.parse().map_err(|_| {
                    ScenarioError::Invalid(format!(
                        "override path `{path}`: `{part}` is not an array index"
                    ))
                })?;
                if i >= items.len() {
                    return Err(ScenarioError::Invalid(format!(
                        "override path `{path}`: index {i} out of bounds (length {})",
                        items.len()
                    )));
                }
                if last {
                    items[i] = leaf;
                    return Ok(());
                }
                cursor = &mut items[i];
            }
            _ => {
                return Err(ScenarioError::Invalid(format!(
                    "override path `{path}`: `{part}` descends into a non-container value"
                )));
            }
        }
    }
    unreachable!("loop always returns on the last segment");
}

/// Names of the scenarios that ship with the crate.
pub fn builtin_names() -> &'static [&'static str] {
    &[
        "baseline-noadv-8",
        "grid-24-adv3",
        "sensor-96-analog",
        "counterexample-7",
        "ring-6-adv1",
        "duo-2",
    ]
}

/// Load a built-in scenario by name, validated and ready to run.
pub fn builtin(name: &str) -> Result<ScenarioConfig, ScenarioError> {
    builtin_file(name)?.into_config()
}

/// The raw file form of a built-in scenario, convenient for serializing or
/// tweaking before validation.
pub fn builtin_file(name: &str) -> Result<ScenarioFile, ScenarioError> {
    match name {
        "baseline-noadv-8" => Ok(baseline_noadv_8()),
        "grid-24-adv3" => Ok(grid_24_adv3()),
        "sensor-96-analog" => Ok(sensor_96_analog()),
        "counterexample-7" => Ok(counterexample_7()),
        "ring-6-adv1" => Ok(ring_6_adv1()),
        "duo-2" => Ok(duo_2()),
        _ => Err(ScenarioError::UnknownBuiltin {
            name: name.to_string(),
            available: builtin_names().join(", "),
        }),
    }
}

/// Read a graph from a file containing either scenario-style JSON
/// (`{"num_nodes": .., "edges": [[to, from], ..]}`) or the plain text
/// edge-list format (`nodes N` header, `i <- j` lines).
pub fn load_graph_file(path: impl AsRef<Path>) -> Result<DirectedGraph, ScenarioError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.display().to_string(),
        source,
    })?;
    if text.trim_start().starts_with('{') {
        let file: GraphFile = serde_json::from_str(&text)?;
        Ok(file.build()?)
    } else {
        Ok(DirectedGraph::from_edge_list_text(&text)?)
    }
}

fn self_loop_edges(n: usize) -> Vec<(usize, usize)> {
    (0..n).map(|i| (i, i)).collect()
}

/// Ring edges at the given hop distances, both directions around the cycle.
fn circulant_edges(n: usize, hops: &[usize]) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for i in 0..n {
        for &h in hops {
            edges.push((i, (i + h) % n));
            edges.push((i, (i + n - h) % n));
        }
    }
    edges
}

fn complete_among(nodes: &[usize]) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for &a in nodes {
        for &b in nodes {
            if a != b {
                edges.push((a, b));
            }
        }
    }
    edges
}

/// `G = I + 𝟙𝟙ᵀ/n`: each agent's cost couples to the population mean, with
/// strong monotonicity constant 1 and Lipschitz constant 2.
fn mean_coupled_quadratic(n: usize, b: Vec<f64>) -> GameFile {
    let mut g = vec![vec![1.0 / n as f64; n]; n];
    for (i, row) in g.iter_mut().enumerate() {
        row[i] += 1.0;
    }
    GameFile::QuadraticAffine { sizes: vec![1; n], g, b }
}

fn baseline_noadv_8() -> ScenarioFile {
    let n = 8;
    ScenarioFile {
        name: "baseline-noadv-8".into(),
        game: mean_coupled_quadratic(n, (0..n).map(|i| -(0.5 + 0.25 * i as f64)).collect()),
        graphs: GraphsFile {
            communication: GraphFile { num_nodes: n, edges: circulant_edges(n, &[1, 2]) },
            observation: GraphFile { num_nodes: n, edges: self_loop_edges(n) },
        },
        filter: FilterConfig { d: 0, eta: 1.0 / 5.0 },
        adversaries: vec![],
        attacks: vec![],
        run: RunSettings {
            alpha: 0.1,
            seed: 1,
            max_iters: 10_000,
            tol: 1e-9,
            init: InitSpec::Gaussian { std: 1.0 },
            record_weights: false,
        },
    }
}

fn grid_24_adv3() -> ScenarioFile {
    let n = 24;
    let mut observation = circulant_edges(n, &[1, 2, 3]);
    observation.extend(self_loop_edges(n));
    ScenarioFile {
        name: "grid-24-adv3".into(),
        game: mean_coupled_quadratic(
            n,
            (0..n).map(|i| -(1.0 + 0.2 * (i % 5) as f64)).collect(),
        ),
        graphs: GraphsFile {
            communication: GraphFile { num_nodes: n, edges: circulant_edges(n, &[1, 2, 3]) },
            observation: GraphFile { num_nodes: n, edges: observation },
        },
        filter: FilterConfig { d: 1, eta: 1.0 / 7.0 },
        adversaries: [0, 8, 16]
            .into_iter()
            .map(|agent| AdversaryEntry {
                agent,
                policy: AdversaryPolicy::GaussianNoise { sigma: 2.0 },
            })
            .collect(),
        attacks: vec![],
        run: RunSettings {
            alpha: 0.05,
            seed: 3,
            max_iters: 20_000,
            tol: 1e-7,
            init: InitSpec::Gaussian { std: 1.0 },
            record_weights: false,
        },
    }
}

fn sensor_96_analog() -> ScenarioFile {
    const W: i64 = 12;
    const H: i64 = 8;
    let id = |x: i64, y: i64| (y * W + x) as usize;
    let n = (W * H) as usize;

    let mut comm = Vec::new();
    let mut cost_edges = Vec::new();
    for y in 0..H {
        for x in 0..W {
            for dy in -2..=2i64 {
                for dx in -2..=2i64 {
                    if dx == 0 && dy == 0 {
                        continue;
                    }
                    let (nx, ny) = (x + dx, y + dy);
                    if (0..W).contains(&nx) && (0..H).contains(&ny) {
                        comm.push((id(x, y), id(nx, ny)));
                    }
                }
            }
            for (dx, dy) in [(1i64, 0i64), (-1, 0), (0, 1), (0, -1)] {
                let (nx, ny) = (x + dx, y + dy);
                if (0..W).contains(&nx) && (0..H).contains(&ny) {
                    cost_edges.push(CostEdge {
                        to: id(x, y),
                        from: id(nx, ny),
                        offset: [(x - nx) as f64, (y - ny) as f64],
                    });
                }
            }
        }
    }
    let mut observation: Vec<(usize, usize)> = comm.clone();
    observation.extend(self_loop_edges(n));

    let adversaries = [0i64, 7]
        .into_iter()
        .flat_map(|y| [0i64, 2, 4, 6, 8, 10].into_iter().map(move |x| id(x, y)))
        .map(|agent| AdversaryEntry {
            agent,
            policy: AdversaryPolicy::GaussianNoise { sigma: 1.0 },
        })
        .collect();

    ScenarioFile {
        name: "sensor-96-analog".into(),
        game: GameFile::SensorNetwork { num_agents: n, target: [0.0, 0.0], cost_edges },
        graphs: GraphsFile {
            communication: GraphFile { num_nodes: n, edges: comm },
            observation: GraphFile { num_nodes: n, edges: observation },
        },
        filter: FilterConfig { d: 3, eta: 1.0 / 25.0 },
        adversaries,
        attacks: vec![],
        run: RunSettings {
            alpha: 0.025,
            seed: 12,
            max_iters: 50_000,
            tol: 1e-4,
            init: InitSpec::Zeros,
            record_weights: false,
        },
    }
}

fn counterexample_7() -> ScenarioFile {
    let n = 7;
    let mut g = vec![vec![0.0; n]; n];
    for (i, row) in g.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for i in 0..3 {
        g[i][i] = 1.25;
        g[i][6] = -0.25;
    }
    let mut b = vec![0.0; n];
    b[6] = -2.0;

    let mut edges = complete_among(&[0, 1, 2, 3]);
    edges.extend(complete_among(&[3, 4, 5, 6]));

    // The right island starts in agreement on the isolated coordinate, so
    // the true x_6 holds still at its equilibrium while the left island
    // never learns it.
    let mut beliefs = vec![vec![0.0; n]; n];
    for holder in [4, 5, 6] {
        beliefs[holder][6] = 2.0;
    }

    ScenarioFile {
        name: "counterexample-7".into(),
        game: GameFile::QuadraticAffine { sizes: vec![1; n], g, b },
        graphs: GraphsFile {
            communication: GraphFile { num_nodes: n, edges },
            observation: GraphFile { num_nodes: n, edges: self_loop_edges(n) },
        },
        filter: FilterConfig { d: 1, eta: 1.0 / 7.0 },
        adversaries: vec![AdversaryEntry {
            agent: 3,
            policy: AdversaryPolicy::ConstantSignal { values: vec![10.0; n] },
        }],
        attacks: vec![],
        run: RunSettings {
            alpha: 0.05,
            seed: 7,
            max_iters: 1500,
            tol: 1e-12,
            init: InitSpec::Explicit { beliefs },
            record_weights: false,
        },
    }
}

fn ring_6_adv1() -> ScenarioFile {
    let n = 6;
    ScenarioFile {
        name: "ring-6-adv1".into(),
        game: mean_coupled_quadratic(n, (0..n).map(|i| -(0.6 + 0.15 * i as f64)).collect()),
        graphs: GraphsFile {
            communication: GraphFile { num_nodes: n, edges: circulant_edges(n, &[1, 2]) },
            observation: GraphFile {
                num_nodes: n,
                edges: [circulant_edges(n, &[1, 2]), self_loop_edges(n)].concat(),
            },
        },
        filter: FilterConfig { d: 1, eta: 1.0 / 5.0 },
        adversaries: vec![AdversaryEntry {
            agent: 3,
            policy: AdversaryPolicy::GaussianNoise { sigma: 1.0 },
        }],
        attacks: vec![],
        run: RunSettings {
            alpha: 0.08,
            seed: 6,
            max_iters: 220,
            tol: 0.0,
            init: InitSpec::Gaussian { std: 1.0 },
            record_weights: true,
        },
    }
}

fn duo_2() -> ScenarioFile {
    ScenarioFile {
        name: "duo-2".into(),
        game: GameFile::QuadraticAffine {
            sizes: vec![1, 1],
            g: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            b: vec![1.0, -1.0],
        },
        graphs: GraphsFile {
            communication: GraphFile { num_nodes: 2, edges: vec![(0, 1), (1, 0)] },
            observation: GraphFile { num_nodes: 2, edges: vec![(0, 0), (1, 1)] },
        },
        filter: FilterConfig { d: 0, eta: 0.5 },
        adversaries: vec![],
        attacks: vec![],
        run: RunSettings {
            alpha: 0.003,
            seed: 42,
            max_iters: 12_000,
            tol: 0.0,
            init: InitSpec::Gaussian { std: 1.0 },
            record_weights: true,
        },
    }
}
