//! Game definitions: per-agent costs, partial gradients, the centralized
//! equilibrium oracle, and the monotonicity/Lipschitz constants.
//!
//! A game couples `N` agents whose actions stack into `x ∈ ℝ^n`. Agent `i`
//! controls the block `x_i ∈ ℝ^{n_i}` and minimizes `J_i(x_i, x_{-i})`. The
//! pseudo-gradient `F(x)` stacks every agent's own-block gradient
//! `∂J_i/∂x_i`; all supported analytic games have affine `F(x) = G x + b`,
//! which makes the equilibrium a linear solve and the strong-monotonicity and
//! Lipschitz moduli eigenvalue problems.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors from game evaluation and the equilibrium oracle.
#[derive(Debug, Error)]
pub enum GameError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("agent index {agent} out of range for {num_agents} agents")]
    AgentOutOfRange { agent: usize, num_agents: usize },
    #[error("input contains a non-finite value")]
    NonFiniteInput,
    #[error("pseudo-gradient matrix is singular or too ill-conditioned to solve")]
    SingularGame,
    #[error("operation is not defined for custom-callback games")]
    UnsupportedGame,
    #[error("game is not strongly monotone (min symmetric eigenvalue {mu})")]
    NotStronglyMonotone { mu: f64 },
    #[error("diagonal block of agent {agent} is not symmetric")]
    AsymmetricBlock { agent: usize },
    #[error("invalid game definition: {0}")]
    Invalid(String),
}

/// Block layout of the stacked action space: agent `i` owns a contiguous
/// slice of length `sizes[i]` starting at `offsets[i]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dims {
    sizes: Vec<usize>,
    offsets: Vec<usize>,
    total: usize,
}

impl Dims {
    pub fn new(sizes: Vec<usize>) -> Result<Self, GameError> {
        if sizes.is_empty() || sizes.iter().any(|&s| s == 0) {
            return Err(GameError::Invalid(
                "every agent must own at least one action component".into(),
            ));
        }
        let mut offsets = Vec::with_capacity(sizes.len());
        let mut total = 0;
        for &s in &sizes {
            offsets.push(total);
            total += s;
        }
        Ok(Self { sizes, offsets, total })
    }

    pub fn uniform(num_agents: usize, per_agent: usize) -> Result<Self, GameError> {
        Self::new(vec![per_agent; num_agents])
    }

    pub fn num_agents(&self) -> usize {
        self.sizes.len()
    }

    pub fn total(&self) -> usize {
        self.total
    }

    pub fn size(&self, agent: usize) -> usize {
        self.sizes[agent]
    }

    pub fn offset(&self, agent: usize) -> usize {
        self.offsets[agent]
    }

    pub fn range(&self, agent: usize) -> std::ops::Range<usize> {
        self.offsets[agent]..self.offsets[agent] + self.sizes[agent]
    }

    pub fn block<'a>(&self, x: &'a [f64], agent: usize) -> &'a [f64] {
        &x[self.range(agent)]
    }

    /// Agent that owns stacked coordinate `c`.
    pub fn owner(&self, c: usize) -> usize {
        match self.offsets.binary_search(&c) {
            Ok(i) => i,
            Err(i) => i - 1,
        }
    }
}

/// A stacked action profile `x ∈ ℝ^n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionProfile {
    pub values: Vec<f64>,
}

impl ActionProfile {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn zeros(total: usize) -> Self {
        Self { values: vec![0.0; total] }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }
}

/// One directed cost coupling in a sensor-network game: agent `to` pays
/// `½‖x_to − x_from − offset‖²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostEdge {
    pub to: usize,
    pub from: usize,
    pub offset: [f64; 2],
}

type CostFn = Arc<dyn Fn(usize, &[f64]) -> f64 + Send + Sync>;
type GradFn = Arc<dyn Fn(usize, &[f64]) -> Vec<f64> + Send + Sync>;

/// The cost structure of a game.
#[derive(Clone)]
pub enum CostKind {
    /// Pseudo-gradient `F(x) = G x + b`. Each diagonal block `G_ii` must be
    /// symmetric so that the quadratic cost
    /// `J_i = ½ x_iᵀ G_ii x_i + x_iᵀ (Σ_{j≠i} G_ij x_j + b_i)`
    /// has exactly `G_{i,:} x + b_i` as its own-block gradient.
    QuadraticAffine { g: DMatrix<f64>, b: DVector<f64> },
    /// Planar sensor placement: `J_i = ½‖mean(x) − target‖² + Σ ½‖x_i − x_j − d_ij‖²`
    /// over the cost edges pointing into `i`. All blocks are 2-dimensional.
    SensorNetwork { target: [f64; 2], cost_edges: Vec<CostEdge> },
    /// User callbacks `(agent, stacked x) → cost` and `→ own-block gradient`.
    /// Excluded from the oracle and constants estimation.
    Custom { cost: CostFn, gradient: GradFn },
}

impl fmt::Debug for CostKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CostKind::QuadraticAffine { g, b } => f
                .debug_struct("QuadraticAffine")
                .field("n", &g.nrows())
                .field("b_len", &b.len())
                .finish(),
            CostKind::SensorNetwork { target, cost_edges } => f
                .debug_struct("SensorNetwork")
                .field("target", target)
                .field("cost_edges", &cost_edges.len())
                .finish(),
            CostKind::Custom { .. } => f.write_str("Custom"),
        }
    }
}

/// A game: block layout plus cost structure.
#[derive(Debug, Clone)]
pub struct GameSpec {
    dims: Dims,
    cost_kind: CostKind,
}

impl GameSpec {
    /// Affine-pseudo-gradient game. Validates shapes, finiteness, and
    /// symmetry of every diagonal block.
    pub fn quadratic_affine(
        dims: Dims,
        g: DMatrix<f64>,
        b: DVector<f64>,
    ) -> Result<Self, GameError> {
        let n = dims.total();
        if g.nrows() != n || g.ncols() != n {
            return Err(GameError::DimensionMismatch { expected: n, got: g.nrows() });
        }
        if b.len() != n {
            return Err(GameError::DimensionMismatch { expected: n, got: b.len() });
        }
        if g.iter().any(|v| !v.is_finite()) || b.iter().any(|v| !v.is_finite()) {
            return Err(GameError::NonFiniteInput);
        }
        for agent in 0..dims.num_agents() {
            let r = dims.range(agent);
            let block = g.view((r.start, r.start), (r.len(), r.len()));
            for i in 0..r.len() {
                for j in (i + 1)..r.len() {
                    if (block[(i, j)] - block[(j, i)]).abs() > 1e-12 {
                        return Err(GameError::AsymmetricBlock { agent });
                    }
                }
            }
        }
        Ok(Self { dims, cost_kind: CostKind::QuadraticAffine { g, b } })
    }

    /// Planar sensor-network game with `num_agents` 2-dimensional actions.
    pub fn sensor_network(
        num_agents: usize,
        target: [f64; 2],
        cost_edges: Vec<CostEdge>,
    ) -> Result<Self, GameError> {
        let dims = Dims::uniform(num_agents, 2)?;
        if !target.iter().all(|v| v.is_finite()) {
            return Err(GameError::NonFiniteInput);
        }
        for e in &cost_edges {
            if e.to >= num_agents || e.from >= num_agents {
                return Err(GameError::AgentOutOfRange {
                    agent: e.to.max(e.from),
                    num_agents,
                });
            }
            if e.to == e.from {
                return Err(GameError::Invalid("cost edge from an agent to itself".into()));
            }
            if !e.offset.iter().all(|v| v.is_finite()) {
                return Err(GameError::NonFiniteInput);
            }
        }
        Ok(Self { dims, cost_kind: CostKind::SensorNetwork { target, cost_edges } })
    }

    /// Game defined by user callbacks.
    pub fn custom(dims: Dims, cost: CostFn, gradient: GradFn) -> Self {
        Self { dims, cost_kind: CostKind::Custom { cost, gradient } }
    }

    pub fn dims(&self) -> &Dims {
        &self.dims
    }

    pub fn num_agents(&self) -> usize {
        self.dims.num_agents()
    }

    pub fn total_dim(&self) -> usize {
        self.dims.total()
    }

    pub fn cost_kind(&self) -> &CostKind {
        &self.cost_kind
    }

    fn check_profile(&self, x: &[f64]) -> Result<(), GameError> {
        if x.len() != self.dims.total() {
            return Err(GameError::DimensionMismatch {
                expected: self.dims.total(),
                got: x.len(),
            });
        }
        if !x.iter().all(|v| v.is_finite()) {
            return Err(GameError::NonFiniteInput);
        }
        Ok(())
    }

    fn check_agent(&self, agent: usize) -> Result<(), GameError> {
        if agent >= self.num_agents() {
            return Err(GameError::AgentOutOfRange { agent, num_agents: self.num_agents() });
        }
        Ok(())
    }

    /// Cost `J_agent(x)` at the stacked profile.
    pub fn eval_cost(&self, agent: usize, x: &[f64]) -> Result<f64, GameError> {
        self.check_agent(agent)?;
        self.check_profile(x)?;
        let xs = x;
        match &self.cost_kind {
            CostKind::QuadraticAffine { g, b } => {
                let r = self.dims.range(agent);
                let mut cost = 0.0;
                for row in r.clone() {
                    let xi = xs[row];
                    let mut own = 0.0;
                    let mut cross = b[row];
                    for col in 0..self.dims.total() {
                        if r.contains(&col) {
                            own += g[(row, col)] * xs[col];
                        } else {
                            cross += g[(row, col)] * xs[col];
                        }
                    }
                    cost += 0.5 * xi * own + xi * cross;
                }
                Ok(cost)
            }
            CostKind::SensorNetwork { target, cost_edges } => {
                let n_agents = self.num_agents() as f64;
                let mut mean = [0.0f64; 2];
                for a in 0..self.num_agents() {
                    let blk = self.dims.block(xs, a);
                    mean[0] += blk[0];
                    mean[1] += blk[1];
                }
                mean[0] = mean[0] / n_agents - target[0];
                mean[1] = mean[1] / n_agents - target[1];
                let mut cost = 0.5 * (mean[0] * mean[0] + mean[1] * mean[1]);
                let xi = self.dims.block(xs, agent);
                for e in cost_edges.iter().filter(|e| e.to == agent) {
                    let xj = self.dims.block(xs, e.from);
                    let dx = xi[0] - xj[0] - e.offset[0];
                    let dy = xi[1] - xj[1] - e.offset[1];
                    cost += 0.5 * (dx * dx + dy * dy);
                }
                Ok(cost)
            }
            CostKind::Custom { cost, .. } => {
                let v = cost(agent, xs);
                if !v.is_finite() {
                    return Err(GameError::NonFiniteInput);
                }
                Ok(v)
            }
        }
    }

    /// Own-block gradient `∂J_agent/∂x_agent` evaluated at the stacked
    /// profile (which may be a belief vector rather than the true profile).
    pub fn eval_partial_gradient(
        &self,
        agent: usize,
        x: &[f64],
    ) -> Result<Vec<f64>, GameError> {
        self.check_agent(agent)?;
        self.check_profile(x)?;
        let xs = x;
        match &self.cost_kind {
            CostKind::QuadraticAffine { g, b } => {
                let r = self.dims.range(agent);
                let mut grad = Vec::with_capacity(r.len());
                for row in r {
                    let mut v = b[row];
                    for col in 0..self.dims.total() {
                        v += g[(row, col)] * xs[col];
                    }
                    grad.push(v);
                }
                Ok(grad)
            }
            CostKind::SensorNetwork { target, cost_edges } => {
                let n_agents = self.num_agents() as f64;
                let mut mean = [0.0f64; 2];
                for a in 0..self.num_agents() {
                    let blk = self.dims.block(xs, a);
                    mean[0] += blk[0];
                    mean[1] += blk[1];
                }
                let xi = self.dims.block(xs, agent);
                let mut grad = vec![
                    (mean[0] / n_agents - target[0]) / n_agents,
                    (mean[1] / n_agents - target[1]) / n_agents,
                ];
                for e in cost_edges.iter().filter(|e| e.to == agent) {
                    let xj = self.dims.block(xs, e.from);
                    grad[0] += xi[0] - xj[0] - e.offset[0];
                    grad[1] += xi[1] - xj[1] - e.offset[1];
                }
                Ok(grad)
            }
            CostKind::Custom { gradient, .. } => {
                let v = gradient(agent, xs);
                if v.len() != self.dims.size(agent) {
                    return Err(GameError::DimensionMismatch {
                        expected: self.dims.size(agent),
                        got: v.len(),
                    });
                }
                if v.iter().any(|g| !g.is_finite()) {
                    return Err(GameError::NonFiniteInput);
                }
                Ok(v)
            }
        }
    }

    /// Stacked pseudo-gradient `F(x)`.
    pub fn pseudo_gradient(&self, x: &[f64]) -> Result<Vec<f64>, GameError> {
        let mut out = Vec::with_capacity(self.dims.total());
        for agent in 0..self.num_agents() {
            out.extend(self.eval_partial_gradient(agent, x)?);
        }
        Ok(out)
    }

    /// The affine pseudo-gradient `(G, b)`, assembled for sensor games.
    /// `None` for custom games.
    pub fn affine_parts(&self) -> Option<(DMatrix<f64>, DVector<f64>)> {
        match &self.cost_kind {
            CostKind::QuadraticAffine { g, b } => Some((g.clone(), b.clone())),
            CostKind::SensorNetwork { target, cost_edges } => {
                let n_agents = self.num_agents();
                let n = self.dims.total();
                let scale = 1.0 / (n_agents as f64 * n_agents as f64);
                let mut g = DMatrix::zeros(n, n);
                let mut b = DVector::zeros(n);
                for i in 0..n_agents {
                    let oi = self.dims.offset(i);
                    for j in 0..n_agents {
                        let oj = self.dims.offset(j);
                        g[(oi, oj)] += scale;
                        g[(oi + 1, oj + 1)] += scale;
                    }
                    b[oi] -= target[0] / n_agents as f64;
                    b[oi + 1] -= target[1] / n_agents as f64;
                }
                for e in cost_edges {
                    let oi = self.dims.offset(e.to);
                    let oj = self.dims.offset(e.from);
                    g[(oi, oi)] += 1.0;
                    g[(oi + 1, oi + 1)] += 1.0;
                    g[(oi, oj)] -= 1.0;
                    g[(oi + 1, oj + 1)] -= 1.0;
                    b[oi] -= e.offset[0];
                    b[oi + 1] -= e.offset[1];
                }
                Some((g, b))
            }
            CostKind::Custom { .. } => None,
        }
    }

    /// Centralized Nash equilibrium: the unique solution of `F(x*) = 0`.
    pub fn solve_ne_oracle(&self) -> Result<ActionProfile, GameError> {
        let (g, b) = self.affine_parts().ok_or(GameError::UnsupportedGame)?;
        let lu = g.clone().lu();
        let mut x = lu.solve(&(-&b)).ok_or(GameError::SingularGame)?;
        for _ in 0..2 {
            let residual = -(&g * &x) - &b;
            if let Some(dx) = lu.solve(&residual) {
                x += dx;
            }
        }
        let residual = (&g * &x + &b).norm();
        if !residual.is_finite() || residual > 1e-10 {
            return Err(GameError::SingularGame);
        }
        Ok(ActionProfile::new(x.iter().copied().collect()))
    }

    /// Strong-monotonicity modulus `μ = λ_min((G + Gᵀ)/2)` and Lipschitz
    /// modulus `L = σ_max(G)` of the pseudo-gradient.
    pub fn estimate_constants(&self) -> Result<(f64, f64), GameError> {
        let (g, _) = self.affine_parts().ok_or(GameError::UnsupportedGame)?;
        let sym = (&g + g.transpose()) * 0.5;
        let eig = sym.symmetric_eigen();
        let mu = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        let lipschitz = g
            .svd(false, false)
            .singular_values
            .iter()
            .copied()
            .fold(0.0f64, f64::max);
        if mu <= 0.0 {
            return Err(GameError::NotStronglyMonotone { mu });
        }
        Ok((mu, lipschitz))
    }
}
