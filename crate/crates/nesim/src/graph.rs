//! Directed graphs and the robustness properties the convergence guarantee
//! rests on.
//!
//! Edge direction convention: the pair `(i, j)` is an edge *from `j` to `i`*,
//! i.e. `j` can send to `i`, and `j` is an in-neighbor of `i`. The text
//! serialization writes each edge as `i <- j` to keep that visible.
//!
//! Three properties are checked:
//!
//! * **r-locality** of a node set `S`: every node outside `S` has at most `r`
//!   in-neighbors inside `S`.
//! * **r-information robustness** of a node `i`: for every set `S` that
//!   contains `i`'s closed observation out-neighborhood (the nodes that
//!   observe `i`, plus `i` itself) and leaves some node outside, some outside
//!   node has at least `r` communication in-edges from `S`.
//! * **Rootedness after removal**: for every way of deleting `r - 1`
//!   communication in-edges per node, the union of the surviving
//!   communication edges and all observation edges still has a directed path
//!   from the root to every node.
//!
//! Information robustness of every node at `r` implies rootedness after
//! removal at `r`; the acceptance suite verifies that implication
//! exhaustively on small graphs.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Largest node count the bitmask-based exhaustive checkers accept.
const MAX_MASK_NODES: usize = 128;
/// Largest node count for exhaustive information-robustness scans.
const MAX_EXHAUSTIVE_NODES: usize = 25;
/// Largest number of removal patterns the exhaustive rootedness check will
/// enumerate.
const MAX_REMOVAL_PATTERNS: u64 = 10_000_000;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("node {node} out of range for {num_nodes} nodes")]
    NodeOutOfRange { node: usize, num_nodes: usize },
    #[error("exhaustive check infeasible: {0}")]
    TooLarge(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("graph parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// A directed graph with deterministic (sorted) adjacency.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DirectedGraph {
    num_nodes: usize,
    /// `in_nbrs[i]` = sorted senders `j` with an edge from `j` to `i`.
    in_nbrs: Vec<Vec<usize>>,
    /// `out_nbrs[j]` = sorted receivers `i` with an edge from `j` to `i`.
    out_nbrs: Vec<Vec<usize>>,
}

impl DirectedGraph {
    /// Builds a graph from `(to, from)` pairs. Duplicates are collapsed.
    pub fn new(num_nodes: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        let mut g = Self {
            num_nodes,
            in_nbrs: vec![Vec::new(); num_nodes],
            out_nbrs: vec![Vec::new(); num_nodes],
        };
        for &(to, from) in edges {
            if to >= num_nodes {
                return Err(GraphError::NodeOutOfRange { node: to, num_nodes });
            }
            if from >= num_nodes {
                return Err(GraphError::NodeOutOfRange { node: from, num_nodes });
            }
            g.in_nbrs[to].push(from);
            g.out_nbrs[from].push(to);
        }
        for list in g.in_nbrs.iter_mut().chain(g.out_nbrs.iter_mut()) {
            list.sort_unstable();
            list.dedup();
        }
        Ok(g)
    }

    /// Builds a graph from undirected pairs, inserting both directions.
    pub fn bidirectional(num_nodes: usize, pairs: &[(usize, usize)]) -> Result<Self, GraphError> {
        let mut edges = Vec::with_capacity(pairs.len() * 2);
        for &(a, b) in pairs {
            edges.push((a, b));
            edges.push((b, a));
        }
        Self::new(num_nodes, &edges)
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn in_neighbors(&self, node: usize) -> &[usize] {
        &self.in_nbrs[node]
    }

    pub fn out_neighbors(&self, node: usize) -> &[usize] {
        &self.out_nbrs[node]
    }

    pub fn in_degree(&self, node: usize) -> usize {
        self.in_nbrs[node].len()
    }

    pub fn max_in_degree(&self) -> usize {
        (0..self.num_nodes).map(|i| self.in_degree(i)).max().unwrap_or(0)
    }

    pub fn has_edge(&self, to: usize, from: usize) -> bool {
        self.in_nbrs[to].binary_search(&from).is_ok()
    }

    pub fn has_self_loop(&self, node: usize) -> bool {
        self.has_edge(node, node)
    }

    pub fn has_all_self_loops(&self) -> bool {
        (0..self.num_nodes).all(|i| self.has_self_loop(i))
    }

    /// All edges as sorted `(to, from)` pairs.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (to, senders) in self.in_nbrs.iter().enumerate() {
            for &from in senders {
                out.push((to, from));
            }
        }
        out
    }

    /// Copy of the graph with every self-loop `i <- i` added.
    pub fn with_self_loops(&self) -> Self {
        let mut g = self.clone();
        for i in 0..g.num_nodes {
            if let Err(pos) = g.in_nbrs[i].binary_search(&i) {
                g.in_nbrs[i].insert(pos, i);
            }
            if let Err(pos) = g.out_nbrs[i].binary_search(&i) {
                g.out_nbrs[i].insert(pos, i);
            }
        }
        g
    }

    /// Serializes as a node-count header followed by one `i <- j` line per
    /// edge, sorted.
    pub fn to_edge_list_text(&self) -> String {
        let mut s = format!("nodes {}\n", self.num_nodes);
        for (to, from) in self.edges() {
            s.push_str(&format!("{to} <- {from}\n"));
        }
        s
    }

    /// Parses the `to_edge_list_text` format.
    pub fn from_edge_list_text(text: &str) -> Result<Self, GraphError> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (line_no, header) = lines
            .next()
            .ok_or(GraphError::Parse { line: 1, message: "empty input".into() })?;
        let num_nodes = header
            .trim()
            .strip_prefix("nodes")
            .and_then(|rest| rest.trim().parse::<usize>().ok())
            .ok_or(GraphError::Parse {
                line: line_no + 1,
                message: "expected header `nodes N`".into(),
            })?;
        let mut edges = Vec::new();
        for (idx, line) in lines {
            let mut parts = line.split("<-");
            let to = parts.next().map(str::trim);
            let from = parts.next().map(str::trim);
            match (to, from, parts.next()) {
                (Some(t), Some(f), None) => {
                    let to = t.parse::<usize>().map_err(|_| GraphError::Parse {
                        line: idx + 1,
                        message: format!("bad node index `{t}`"),
                    })?;
                    let from = f.parse::<usize>().map_err(|_| GraphError::Parse {
                        line: idx + 1,
                        message: format!("bad node index `{f}`"),
                    })?;
                    edges.push((to, from));
                }
                _ => {
                    return Err(GraphError::Parse {
                        line: idx + 1,
                        message: "expected `i <- j`".into(),
                    })
                }
            }
        }
        Self::new(num_nodes, &edges)
    }

    fn check_node(&self, node: usize) -> Result<(), GraphError> {
        if node >= self.num_nodes {
            return Err(GraphError::NodeOutOfRange { node, num_nodes: self.num_nodes });
        }
        Ok(())
    }

    fn in_masks(&self) -> Result<Vec<u128>, GraphError> {
        if self.num_nodes > MAX_MASK_NODES {
            return Err(GraphError::TooLarge(format!(
                "bitmask analysis supports up to {MAX_MASK_NODES} nodes, got {}",
                self.num_nodes
            )));
        }
        Ok((0..self.num_nodes)
            .map(|i| self.in_nbrs[i].iter().fold(0u128, |m, &j| m | (1 << j)))
            .collect())
    }

    fn out_masks(&self) -> Result<Vec<u128>, GraphError> {
        if self.num_nodes > MAX_MASK_NODES {
            return Err(GraphError::TooLarge(format!(
                "bitmask analysis supports up to {MAX_MASK_NODES} nodes, got {}",
                self.num_nodes
            )));
        }
        Ok((0..self.num_nodes)
            .map(|j| self.out_nbrs[j].iter().fold(0u128, |m, &i| m | (1 << i)))
            .collect())
    }
}

/// Which property a report refers to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Property {
    InformationRobust { node: usize, r: usize },
    RootedAfterRemoval { root: usize, r: usize },
    Assumptions { d: usize },
}

/// Why an assumption clause failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ClauseFailure {
    LocalityExceeded { allowed: usize, found: usize, node: usize },
    InDegreeTooSmall { node: usize, degree: usize, required: usize },
    NotInformationRobust { node: usize, required_r: usize, violating_set: Vec<usize> },
}

/// Counterexample data attached to a failed check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Witness {
    /// A set `S` violating information robustness.
    ViolatingSet(Vec<usize>),
    /// A removal pattern and a node it disconnects from the root.
    RemovalPattern { removed: Vec<(usize, usize)>, unreachable: usize },
    /// Failed assumption clauses.
    Clauses(Vec<ClauseFailure>),
}

/// Outcome of a robustness check. `witness` is present exactly when `holds`
/// is false; `note` qualifies sampled (non-exhaustive) verdicts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessReport {
    pub property: Property,
    pub holds: bool,
    pub witness: Option<Witness>,
    pub note: Option<String>,
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::InformationRobust { node, r } => {
                write!(f, "{r}-information robustness at node {node}")
            }
            Self::RootedAfterRemoval { root, r } => {
                write!(f, "rootedness at {root} under up to {} removals per node", r - 1)
            }
            Self::Assumptions { d } => write!(f, "update-rule assumptions for d = {d}"),
        }
    }
}

impl fmt::Display for ClauseFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::LocalityExceeded { allowed, found, node } => write!(
                f,
                "adversary set is not {allowed}-local: node {node} has {found} adversarial \
                 in-neighbors"
            ),
            Self::InDegreeTooSmall { node, degree, required } => write!(
                f,
                "truthful node {node} has in-degree {degree}, below the required {required}"
            ),
            Self::NotInformationRobust { node, required_r, violating_set } => write!(
                f,
                "node {node} is not {required_r}-information robust; violating set \
                 {violating_set:?}"
            ),
        }
    }
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::ViolatingSet(set) => write!(f, "violating set {set:?}"),
            Self::RemovalPattern { removed, unreachable } => write!(
                f,
                "removing in-edges {removed:?} leaves node {unreachable} unreachable"
            ),
            Self::Clauses(clauses) => {
                for (i, clause) in clauses.iter().enumerate() {
                    if i > 0 {
                        writeln!(f)?;
                    }
                    write!(f, "  - {clause}")?;
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for RobustnessReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.holds { "holds" } else { "fails" };
        write!(f, "{} {verdict}", self.property)?;
        if let Some(witness) = &self.witness {
            match witness {
                Witness::Clauses(_) => write!(f, ":\n{witness}")?,
                _ => write!(f, ": {witness}")?,
            }
        }
        if let Some(note) = &self.note {
            write!(f, " ({note})")?;
        }
        Ok(())
    }
}

/// Maximum number of in-neighbors inside `set` over all nodes outside `set`.
/// An adversary set is `r`-local exactly when this number is at most `r`.
pub fn locality_number(graph: &DirectedGraph, set: &[usize]) -> Result<usize, GraphError> {
    for &s in set {
        graph.check_node(s)?;
    }
    let mut in_set = vec![false; graph.num_nodes()];
    for &s in set {
        in_set[s] = true;
    }
    let mut worst = 0;
    for i in 0..graph.num_nodes() {
        if in_set[i] {
            continue;
        }
        let count = graph.in_neighbors(i).iter().filter(|&&j| in_set[j]).count();
        worst = worst.max(count);
    }
    Ok(worst)
}

fn mask_to_sorted_vec(mask: u128, num_nodes: usize) -> Vec<usize> {
    (0..num_nodes).filter(|&i| mask >> i & 1 == 1).collect()
}

/// Exhaustive information-robustness check for `node` at level `r`.
///
/// Scans every set `S` with `closed_obs(node) ⊆ S ⊊ nodes`, where
/// `closed_obs(node)` is `node` plus the observation out-neighbors of `node`.
/// `S` values are enumerated in ascending bitmask order, so the first
/// (smallest-index-weighted) violating set is returned as witness.
pub fn is_information_robust(
    gc: &DirectedGraph,
    go: &DirectedGraph,
    node: usize,
    r: usize,
) -> Result<RobustnessReport, GraphError> {
    check_pair(gc, go)?;
    gc.check_node(node)?;
    if r == 0 {
        return Err(GraphError::InvalidParameter("robustness level r must be >= 1".into()));
    }
    if gc.num_nodes() > MAX_EXHAUSTIVE_NODES {
        return Err(GraphError::TooLarge(format!(
            "information robustness scans up to {MAX_EXHAUSTIVE_NODES} nodes, got {}; \
             use the sampled variant",
            gc.num_nodes()
        )));
    }
    let n = gc.num_nodes();
    let in_masks = gc.in_masks()?;
    let go_out = go.out_masks()?;
    let full: u128 = if n == 128 { u128::MAX } else { (1u128 << n) - 1 };
    let closed_obs = go_out[node] | (1 << node);
    let complement = full & !closed_obs;

    // Ascending submask enumeration of the complement: t' = (t - c) & c.
    let mut t: u128 = 0;
    loop {
        let s = closed_obs | t;
        if s != full && !set_has_informed_outsider(&in_masks, s, full, r) {
            return Ok(RobustnessReport {
                property: Property::InformationRobust { node, r },
                holds: false,
                witness: Some(Witness::ViolatingSet(mask_to_sorted_vec(s, n))),
                note: None,
            });
        }
        if t == complement {
            break;
        }
        t = t.wrapping_sub(complement) & complement;
    }
    Ok(RobustnessReport {
        property: Property::InformationRobust { node, r },
        holds: true,
        witness: None,
        note: None,
    })
}

fn set_has_informed_outsider(in_masks: &[u128], s: u128, full: u128, r: usize) -> bool {
    let outside = full & !s;
    let mut rest = outside;
    while rest != 0 {
        let j = rest.trailing_zeros() as usize;
        rest &= rest - 1;
        if (in_masks[j] & s).count_ones() as usize >= r {
            return true;
        }
    }
    false
}

/// Sampled information-robustness check: tests `trials` random supersets of
/// the closed observation neighborhood. Can only certify `holds = false`.
pub fn is_information_robust_sampled(
    gc: &DirectedGraph,
    go: &DirectedGraph,
    node: usize,
    r: usize,
    trials: usize,
    seed: u64,
) -> Result<RobustnessReport, GraphError> {
    check_pair(gc, go)?;
    gc.check_node(node)?;
    if r == 0 {
        return Err(GraphError::InvalidParameter("robustness level r must be >= 1".into()));
    }
    let n = gc.num_nodes();
    let in_masks = gc.in_masks()?;
    let go_out = go.out_masks()?;
    let full: u128 = if n == 128 { u128::MAX } else { (1u128 << n) - 1 };
    let closed_obs = go_out[node] | (1 << node);
    let mut rng = ChaCha12Rng::seed_from_u64(seed ^ (node as u64).rotate_left(17));
    for _ in 0..trials {
        let mut s = closed_obs;
        for j in 0..n {
            if rng.gen_bool(0.5) {
                s |= 1 << j;
            }
        }
        if s == full {
            continue;
        }
        if !set_has_informed_outsider(&in_masks, s, full, r) {
            return Ok(RobustnessReport {
                property: Property::InformationRobust { node, r },
                holds: false,
                witness: Some(Witness::ViolatingSet(mask_to_sorted_vec(s, n))),
                note: Some(format!("sampled mode, counterexample found within {trials} trials")),
            });
        }
    }
    Ok(RobustnessReport {
        property: Property::InformationRobust { node, r },
        holds: true,
        witness: None,
        note: Some(format!("sampled mode, no counterexample in {trials} trials; not a proof")),
    })
}

/// How `rooted_after_removal` explores the removal patterns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RemovalMode {
    /// Enumerate every admissible pattern (refused above a fixed budget).
    Exhaustive,
    /// Test `trials` random patterns; can only certify `holds = false`.
    Sampled { trials: usize, seed: u64 },
}

/// Checks that the union of surviving communication edges and all observation
/// edges stays rooted at `root` for every admissible removal pattern
/// (each node loses `min(r - 1, in-degree)` communication in-edges).
///
/// Exhaustive mode enumerates patterns lexicographically (by node, then by
/// combination) and returns the first failing pattern as witness.
pub fn rooted_after_removal(
    gc: &DirectedGraph,
    go: &DirectedGraph,
    root: usize,
    r: usize,
    mode: RemovalMode,
) -> Result<RobustnessReport, GraphError> {
    check_pair(gc, go)?;
    gc.check_node(root)?;
    if r == 0 {
        return Err(GraphError::InvalidParameter("robustness level r must be >= 1".into()));
    }
    let n = gc.num_nodes();
    let go_out = go.out_masks()?;
    let property = Property::RootedAfterRemoval { root, r };

    let remove_counts: Vec<usize> =
        (0..n).map(|i| (r - 1).min(gc.in_degree(i))).collect();

    match mode {
        RemovalMode::Exhaustive => {
            let mut total: f64 = 1.0;
            for i in 0..n {
                total *= binomial(gc.in_degree(i), remove_counts[i]);
                if total > MAX_REMOVAL_PATTERNS as f64 {
                    return Err(GraphError::TooLarge(format!(
                        "removal pattern count exceeds budget of {MAX_REMOVAL_PATTERNS}"
                    )));
                }
            }
            let mut combos: Vec<Combination> = (0..n)
                .map(|i| Combination::first(gc.in_degree(i), remove_counts[i]))
                .collect();
            loop {
                let removed_masks = removed_masks(gc, &combos);
                if let Some(unreachable) =
                    first_unreachable(gc, &go_out, root, &removed_masks)
                {
                    return Ok(RobustnessReport {
                        property,
                        holds: false,
                        witness: Some(Witness::RemovalPattern {
                            removed: removed_edges(gc, &combos),
                            unreachable,
                        }),
                        note: None,
                    });
                }
                if !advance(&mut combos) {
                    break;
                }
            }
            Ok(RobustnessReport { property, holds: true, witness: None, note: None })
        }
        RemovalMode::Sampled { trials, seed } => {
            let mut rng = ChaCha12Rng::seed_from_u64(seed ^ (root as u64).rotate_left(29));
            for _ in 0..trials {
                let combos: Vec<Combination> = (0..n)
                    .map(|i| Combination::random(gc.in_degree(i), remove_counts[i], &mut rng))
                    .collect();
                let removed_masks = removed_masks(gc, &combos);
                if let Some(unreachable) =
                    first_unreachable(gc, &go_out, root, &removed_masks)
                {
                    return Ok(RobustnessReport {
                        property,
                        holds: false,
                        witness: Some(Witness::RemovalPattern {
                            removed: removed_edges(gc, &combos),
                            unreachable,
                        }),
                        note: Some(format!(
                            "sampled mode, counterexample found within {trials} trials"
                        )),
                    });
                }
            }
            Ok(RobustnessReport {
                property,
                holds: true,
                witness: None,
                note: Some(format!(
                    "sampled mode, no counterexample in {trials} trials; not a proof"
                )),
            })
        }
    }
}

/// Exact closure-based equivalent of exhaustive `rooted_after_removal`.
///
/// A node is guaranteed reachable under every removal pattern exactly when it
/// can be added to a growing reached set by either an observation edge from
/// the set (observation edges are never removed) or at least `r`
/// communication in-edges from the set (at most `r - 1` of them can be
/// removed). If the closure stalls before covering all nodes, deleting every
/// communication edge that crosses from the closure to the outside (at most
/// `r - 1` per node, by construction) is an admissible pattern that
/// disconnects the remainder. The acceptance suite cross-validates this
/// against the enumerating implementation on every 4-node graph.
pub fn rooted_for_all_removals(
    gc: &DirectedGraph,
    go: &DirectedGraph,
    root: usize,
    r: usize,
) -> Result<bool, GraphError> {
    check_pair(gc, go)?;
    gc.check_node(root)?;
    if r == 0 {
        return Err(GraphError::InvalidParameter("robustness level r must be >= 1".into()));
    }
    let n = gc.num_nodes();
    let in_masks = gc.in_masks()?;
    let go_out = go.out_masks()?;
    let full: u128 = if n == 128 { u128::MAX } else { (1u128 << n) - 1 };
    let mut reached: u128 = 1 << root;
    loop {
        let mut grew = false;
        let mut frontier: u128 = 0;
        let mut rest = reached;
        while rest != 0 {
            let u = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            frontier |= go_out[u];
        }
        let mut candidates = full & !reached;
        let obs_new = frontier & candidates;
        if obs_new != 0 {
            reached |= obs_new;
            grew = true;
            candidates &= !obs_new;
        }
        let mut scan = candidates;
        while scan != 0 {
            let j = scan.trailing_zeros() as usize;
            scan &= scan - 1;
            if (in_masks[j] & reached).count_ones() as usize >= r {
                reached |= 1 << j;
                grew = true;
            }
        }
        if !grew {
            break;
        }
    }
    Ok(reached == full)
}

/// Checks the three graph-side assumptions for adversary budget `d`:
/// the adversary set is `d`-local on the communication graph, every
/// non-adversarial node has communication in-degree at least `2d + 1`, and
/// every node is `(2d + 1)`-information robust. Returns one report listing
/// every failed clause with a witness.
pub fn check_assumptions(
    gc: &DirectedGraph,
    go: &DirectedGraph,
    adversaries: &[usize],
    d: usize,
) -> Result<RobustnessReport, GraphError> {
    check_pair(gc, go)?;
    for &a in adversaries {
        gc.check_node(a)?;
    }
    let mut failures = Vec::new();
    let mut is_adv = vec![false; gc.num_nodes()];
    for &a in adversaries {
        is_adv[a] = true;
    }

    for i in 0..gc.num_nodes() {
        if is_adv[i] {
            continue;
        }
        let count = gc.in_neighbors(i).iter().filter(|&&j| is_adv[j]).count();
        if count > d {
            failures.push(ClauseFailure::LocalityExceeded { allowed: d, found: count, node: i });
        }
    }

    let required_degree = 2 * d + 1;
    for i in 0..gc.num_nodes() {
        if is_adv[i] {
            continue;
        }
        if gc.in_degree(i) < required_degree {
            failures.push(ClauseFailure::InDegreeTooSmall {
                node: i,
                degree: gc.in_degree(i),
                required: required_degree,
            });
        }
    }

    let required_r = 2 * d + 1;
    for m in 0..gc.num_nodes() {
        let report = is_information_robust(gc, go, m, required_r)?;
        if !report.holds {
            let set = match report.witness {
                Some(Witness::ViolatingSet(s)) => s,
                _ => Vec::new(),
            };
            failures.push(ClauseFailure::NotInformationRobust {
                node: m,
                required_r,
                violating_set: set,
            });
        }
    }

    let holds = failures.is_empty();
    Ok(RobustnessReport {
        property: Property::Assumptions { d },
        holds,
        witness: if holds { None } else { Some(Witness::Clauses(failures)) },
        note: None,
    })
}

fn check_pair(gc: &DirectedGraph, go: &DirectedGraph) -> Result<(), GraphError> {
    if gc.num_nodes() != go.num_nodes() {
        return Err(GraphError::InvalidParameter(format!(
            "graph pair has mismatched node counts: {} vs {}",
            gc.num_nodes(),
            go.num_nodes()
        )));
    }
    Ok(())
}

fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k.min(n));
    let mut v = 1.0f64;
    for i in 0..k {
        v = v * (n - i) as f64 / (i + 1) as f64;
    }
    v
}

/// Lexicographic k-of-n position combination.
struct Combination {
    n: usize,
    positions: Vec<usize>,
}

impl Combination {
    fn first(n: usize, k: usize) -> Self {
        Self { n, positions: (0..k).collect() }
    }

    fn random(n: usize, k: usize, rng: &mut impl Rng) -> Self {
        let mut pool: Vec<usize> = (0..n).collect();
        let mut positions = Vec::with_capacity(k);
        for taken in 0..k {
            let idx = rng.gen_range(taken..n);
            pool.swap(taken, idx);
            positions.push(pool[taken]);
        }
        positions.sort_unstable();
        Self { n, positions }
    }

    /// Advances to the next combination in lexicographic order; false when
    /// wrapped back to the first.
    fn next(&mut self) -> bool {
        let k = self.positions.len();
        if k == 0 {
            return false;
        }
        let mut i = k;
        while i > 0 {
            i -= 1;
            if self.positions[i] < self.n - (k - i) {
                self.positions[i] += 1;
                for j in i + 1..k {
                    self.positions[j] = self.positions[j - 1] + 1;
                }
                return true;
            }
        }
        self.positions = (0..k).collect();
        false
    }
}

/// Odometer over per-node combinations; the last node advances fastest.
fn advance(combos: &mut [Combination]) -> bool {
    for c in combos.iter_mut().rev() {
        if c.next() {
            return true;
        }
    }
    false
}

fn removed_masks(gc: &DirectedGraph, combos: &[Combination]) -> Vec<u128> {
    combos
        .iter()
        .enumerate()
        .map(|(node, c)| {
            c.positions
                .iter()
                .fold(0u128, |m, &p| m | (1 << gc.in_neighbors(node)[p]))
        })
        .collect()
}

fn removed_edges(gc: &DirectedGraph, combos: &[Combination]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for (node, c) in combos.iter().enumerate() {
        for &p in &c.positions {
            out.push((node, gc.in_neighbors(node)[p]));
        }
    }
    out
}

/// BFS over surviving communication edges plus all observation edges;
/// returns the smallest unreachable node, if any.
fn first_unreachable(
    gc: &DirectedGraph,
    go_out: &[u128],
    root: usize,
    removed_in: &[u128],
) -> Option<usize> {
    let n = gc.num_nodes();
    let full: u128 = if n == 128 { u128::MAX } else { (1u128 << n) - 1 };
    let mut reached: u128 = 1 << root;
    let mut queue = vec![root];
    while let Some(u) = queue.pop() {
        let mut new = go_out[u] & !reached;
        for &v in gc.out_neighbors(u) {
            if reached >> v & 1 == 0 && removed_in[v] >> u & 1 == 0 {
                new |= 1 << v;
            }
        }
        while new != 0 {
            let v = new.trailing_zeros() as usize;
            new &= new - 1;
            reached |= 1 << v;
            queue.push(v);
        }
    }
    if reached == full {
        None
    } else {
        Some((full & !reached).trailing_zeros() as usize)
    }
}

/// The two-cluster cut-vertex graph used throughout the tests and examples:
/// two complete 4-cliques sharing node 3 (all edges bidirectional).
pub fn counterexample_seven() -> DirectedGraph {
    DirectedGraph::bidirectional(
        7,
        &[
            (0, 1),
            (0, 2),
            (0, 3),
            (1, 2),
            (1, 3),
            (2, 3),
            (3, 4),
            (3, 5),
            (3, 6),
            (4, 5),
            (4, 6),
            (5, 6),
        ],
    )
    .expect("static graph")
}
