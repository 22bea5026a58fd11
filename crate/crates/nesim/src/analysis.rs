//! Numerical machinery behind the convergence guarantee: stacked weight
//! matrices, transition products, the finite-horizon Lyapunov matrices P[k],
//! the contraction constants (C, p̄), the 2x2 step-size matrix M, and the
//! trajectory Lyapunov function.
//!
//! Conventions. With N agents and total action dimension n, stacked vectors
//! live in R^{Nn}, agent-major: entry `i*n + c` is agent i's estimate of
//! global coordinate c. The consensus projector A replicates the true
//! profile: `(Ax)_{i,c} = x_{owner(c), c}`. It satisfies A^2 = A and, for
//! every assembled weight matrix, `A W = W A = A`; its operator norm as a
//! projector is 1 (it is not an orthogonal projection, so this is its
//! spectral radius, not its induced 2-norm).

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::game::Dims;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("weight row for agent {agent}, coordinate {coordinate} sums to {sum}, expected 1")]
    RowSumViolation { agent: usize, coordinate: usize, sum: f64 },
    #[error("weight row for agent {agent}, coordinate {coordinate} has negative entry {weight}")]
    NegativeWeight { agent: usize, coordinate: usize, weight: f64 },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("transition product of an empty matrix list")]
    EmptyProduct,
    #[error(
        "truncated Lyapunov sum did not converge: tail {tail:.3e} above tolerance after \
         horizon {horizon}"
    )]
    NotConverged { tail: f64, horizon: usize },
    #[error("domain error: {0}")]
    Domain(String),
}

/// The consensus projector A, stored as structure (not dense): applying it
/// gathers every agent's own action block and replicates the result to all
/// agents.
#[derive(Debug, Clone)]
pub struct ProjectionA {
    dims: Dims,
}

impl ProjectionA {
    pub fn new(dims: &Dims) -> Self {
        Self { dims: dims.clone() }
    }

    /// Side length of the stacked space, N * n.
    pub fn size(&self) -> usize {
        self.dims.num_agents() * self.dims.total()
    }

    /// The true profile `R x`: coordinate c read from its owner's belief.
    pub fn extract_truth(&self, stacked: &[f64]) -> Vec<f64> {
        let n = self.dims.total();
        (0..n).map(|c| stacked[self.dims.owner(c) * n + c]).collect()
    }

    /// `A x`: the true profile replicated to every agent.
    pub fn apply(&self, stacked: &[f64]) -> Vec<f64> {
        let n = self.dims.total();
        let truth = self.extract_truth(stacked);
        let mut out = Vec::with_capacity(self.size());
        for _ in 0..self.dims.num_agents() {
            out.extend_from_slice(&truth);
        }
        let _ = n;
        out
    }

    /// Dense form, for matrix-level checks.
    pub fn matrix(&self) -> DMatrix<f64> {
        let n = self.dims.total();
        let size = self.size();
        let mut a = DMatrix::zeros(size, size);
        for i in 0..self.dims.num_agents() {
            for c in 0..n {
                a[(i * n + c, self.dims.owner(c) * n + c)] = 1.0;
            }
        }
        a
    }
}

/// One round's averaging step as a dense row-stochastic matrix on the
/// stacked space: `v[k] = W[k] x[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct StackedWeightMatrix {
    pub round: u64,
    pub matrix: DMatrix<f64>,
}

/// Assembles the stacked matrix from per-(agent, coordinate) weight rows
/// over agents. `rows[i][c][j]` is the weight receiver `i` puts on sender
/// `j`'s copy of coordinate `c`; rows for observed coordinates are selector
/// rows pointing at the owner.
pub fn assemble_wbar(
    dims: &Dims,
    round: u64,
    rows: &[Vec<Vec<f64>>],
) -> Result<StackedWeightMatrix, AnalysisError> {
    let n_agents = dims.num_agents();
    let n = dims.total();
    if rows.len() != n_agents {
        return Err(AnalysisError::ShapeMismatch(format!(
            "expected rows for {n_agents} agents, got {}",
            rows.len()
        )));
    }
    let mut matrix = DMatrix::zeros(n_agents * n, n_agents * n);
    for (i, agent_rows) in rows.iter().enumerate() {
        if agent_rows.len() != n {
            return Err(AnalysisError::ShapeMismatch(format!(
                "agent {i} has rows for {} coordinates, expected {n}",
                agent_rows.len()
            )));
        }
        for (c, row) in agent_rows.iter().enumerate() {
            if row.len() != n_agents {
                return Err(AnalysisError::ShapeMismatch(format!(
                    "row for agent {i}, coordinate {c} has length {}, expected {n_agents}",
                    row.len()
                )));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > 1e-10 {
                return Err(AnalysisError::RowSumViolation { agent: i, coordinate: c, sum });
            }
            for (j, &w) in row.iter().enumerate() {
                if w < -1e-12 {
                    return Err(AnalysisError::NegativeWeight {
                        agent: i,
                        coordinate: c,
                        weight: w,
                    });
                }
                matrix[(i * n + c, j * n + c)] = w;
            }
        }
    }
    Ok(StackedWeightMatrix { round, matrix })
}

/// Ordered product of weight matrices, oldest first in the input, newest
/// applied last (leftmost in the product).
pub fn transition_product(ws: &[StackedWeightMatrix]) -> Result<DMatrix<f64>, AnalysisError> {
    let first = ws.first().ok_or(AnalysisError::EmptyProduct)?;
    let size = first.matrix.nrows();
    let mut product = DMatrix::identity(size, size);
    for w in ws {
        if w.matrix.nrows() != size || w.matrix.ncols() != size {
            return Err(AnalysisError::ShapeMismatch(format!(
                "round {} matrix is {}x{}, expected {size}x{size}",
                w.round,
                w.matrix.nrows(),
                w.matrix.ncols()
            )));
        }
        product = &w.matrix * product;
    }
    Ok(product)
}

/// The finite-horizon Lyapunov matrices and their tail diagnostics.
#[derive(Debug, Clone)]
pub struct PSequence {
    /// `p[k]` for k = 0 ..= recorded rounds (the last entry belongs to the
    /// stationary extension).
    pub p: Vec<DMatrix<f64>>,
    /// Horizon (number of summed terms minus one) used per k.
    pub horizons: Vec<usize>,
    /// Measured tail `||Phi(k+T, k) - A||_F^2` per k: an upper bound on the
    /// spectral-norm residual of the defining recursion.
    pub tails: Vec<f64>,
}

/// Builds `P[k] = sum_j [Phi(j-1,k)(I-A)]^T [Phi(j-1,k)(I-A)]`, truncating
/// each sum when the measured tail drops below `tol`. Rounds past the end of
/// `ws` reuse the last recorded matrix (stationary extension), so one more
/// `P` is returned than there are recorded rounds. The truncated sequence
/// satisfies `W[k]^T P[k+1] W[k] = P[k] - (I-A)^T (I-A)` up to a residual
/// whose spectral norm is exactly `||Phi(k+T,k) - A||_2^2 <= tail`.
#[allow(non_snake_case)]
pub fn finite_horizon_P(
    ws: &[StackedWeightMatrix],
    a: &ProjectionA,
    tol: f64,
    max_horizon: usize,
) -> Result<PSequence, AnalysisError> {
    if ws.is_empty() {
        return Err(AnalysisError::EmptyProduct);
    }
    let size = a.size();
    for w in ws {
        if w.matrix.nrows() != size || w.matrix.ncols() != size {
            return Err(AnalysisError::ShapeMismatch(format!(
                "round {} matrix is {}x{}, expected {size}x{size}",
                w.round,
                w.matrix.nrows(),
                w.matrix.ncols()
            )));
        }
    }
    let a_dense = a.matrix();
    let identity = DMatrix::<f64>::identity(size, size);
    let wbar_at = |idx: usize| &ws[idx.min(ws.len() - 1)].matrix;

    let mut out = PSequence { p: Vec::new(), horizons: Vec::new(), tails: Vec::new() };
    for k in 0..=ws.len() {
        let mut p = DMatrix::<f64>::zeros(size, size);
        let mut phi = identity.clone();
        let mut horizon = 0usize;
        let mut tail = f64::INFINITY;
        for step in 0..=max_horizon {
            // Phi(k + step - 1, k) is current; its term uses Phi - A, which
            // equals Phi (I - A) because Phi A = A (for step 0, I - A).
            let b = &phi - &a_dense;
            p += b.transpose() * &b;
            phi = wbar_at(k + step) * phi;
            let residual = &phi - &a_dense;
            tail = residual.iter().map(|v| v * v).sum::<f64>();
            horizon = step;
            if tail <= tol {
                break;
            }
        }
        if tail > tol {
            return Err(AnalysisError::NotConverged { tail, horizon });
        }
        // Symmetrize against accumulated roundoff.
        p = (&p + p.transpose()) * 0.5;
        out.p.push(p);
        out.horizons.push(horizon);
        out.tails.push(tail);
    }
    Ok(out)
}

/// The guarantee's scalar constants for one scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoryConstants {
    pub n_agents: usize,
    pub eta: f64,
    pub mu: f64,
    pub l: f64,
    /// Contraction factor of (N-1)-round transition products.
    pub c: f64,
    /// Uniform eigenvalue bound on every P[k].
    pub pbar: f64,
}

impl TheoryConstants {
    pub fn new(n_agents: usize, eta: f64, mu: f64, l: f64) -> Result<Self, AnalysisError> {
        if !(mu.is_finite() && mu > 0.0) {
            return Err(AnalysisError::Domain(format!(
                "strong monotonicity constant must be positive, got {mu}"
            )));
        }
        if !(l.is_finite() && l >= mu) {
            return Err(AnalysisError::Domain(format!(
                "Lipschitz constant must satisfy L >= mu, got L = {l}, mu = {mu}"
            )));
        }
        let (c, pbar) = compute_pbar(n_agents, eta)?;
        Ok(Self { n_agents, eta, mu, l, c, pbar })
    }
}

/// `C = 1 - (eta/2)^{N-1}` and `pbar = 4N / (1 - C^{2/(N-1)})`.
pub fn compute_pbar(n_agents: usize, eta: f64) -> Result<(f64, f64), AnalysisError> {
    if n_agents < 2 {
        return Err(AnalysisError::Domain(format!(
            "contraction constants need at least 2 agents, got {n_agents}"
        )));
    }
    if !(eta.is_finite() && eta > 0.0 && eta <= 1.0) {
        return Err(AnalysisError::Domain(format!(
            "weight floor eta must lie in (0, 1], got {eta}"
        )));
    }
    let n = n_agents as f64;
    let c = 1.0 - (eta / 2.0).powi(n_agents as i32 - 1);
    let pbar = 4.0 * n / (1.0 - c.powf(2.0 / (n - 1.0)));
    Ok((c, pbar))
}

/// The 2x2 matrix whose positive definiteness certifies step size `alpha`,
/// with its leading minors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepSizeReport {
    pub alpha: f64,
    pub m: [[f64; 2]; 2],
    pub leading_minor: f64,
    pub determinant: f64,
    pub feasible: bool,
}

/// Evaluates the step-size matrix
/// `[[2*alpha*mu - pbar*alpha^2*L^2, -alpha*pbar*L*(1 + alpha*L)],
///   [symmetric, 1 - 2*alpha*(pbar - 1)*L - pbar*alpha^2*L^2]]`
/// and tests positive definiteness via leading minors.
pub fn step_size_test(tc: &TheoryConstants, alpha: f64) -> StepSizeReport {
    let (mu, l, pbar) = (tc.mu, tc.l, tc.pbar);
    let m11 = 2.0 * alpha * mu - pbar * alpha * alpha * l * l;
    let m12 = -alpha * pbar * l * (1.0 + alpha * l);
    let m22 = 1.0 - 2.0 * alpha * (pbar - 1.0) * l - pbar * alpha * alpha * l * l;
    let det = m11 * m22 - m12 * m12;
    StepSizeReport {
        alpha,
        m: [[m11, m12], [m12, m22]],
        leading_minor: m11,
        determinant: det,
        feasible: alpha > 0.0 && m11 > 0.0 && det > 0.0,
    }
}

/// Largest certifiable step size, located by bracketing and bisection.
/// Feasibility always holds for sufficiently small alpha (the determinant is
/// `2*alpha*mu + O(alpha^2)`), so the boundary is well defined.
pub fn max_feasible_alpha(tc: &TheoryConstants) -> Result<f64, AnalysisError> {
    let mut lo = 1e-12;
    let mut shrink = 0;
    while !step_size_test(tc, lo).feasible {
        lo /= 16.0;
        shrink += 1;
        if shrink > 20 {
            return Err(AnalysisError::Domain(
                "no feasible step size found near zero".into(),
            ));
        }
    }
    let mut hi = lo;
    let mut grow = 0;
    while step_size_test(tc, hi).feasible {
        hi *= 2.0;
        grow += 1;
        if grow > 200 {
            return Err(AnalysisError::Domain(
                "feasible region appears unbounded; constants are inconsistent".into(),
            ));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if step_size_test(tc, mid).feasible {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// The trajectory Lyapunov function
/// `V = (v - Av)^T P (v - Av) + ||Av - 1 (x) x*||^2`
/// evaluated at one stacked filtered vector. `x_star` is the equilibrium
/// profile of length n.
pub fn lyapunov_value(
    p: &DMatrix<f64>,
    a: &ProjectionA,
    stacked_v: &[f64],
    x_star: &[f64],
) -> f64 {
    let av = a.apply(stacked_v);
    let d: DVector<f64> =
        DVector::from_iterator(stacked_v.len(), stacked_v.iter().zip(&av).map(|(v, w)| v - w));
    let quad = (d.transpose() * p * &d)[(0, 0)];
    let n = x_star.len();
    let dist: f64 = av
        .iter()
        .enumerate()
        .map(|(idx, v)| {
            let e = v - x_star[idx % n];
            e * e
        })
        .sum();
    quad + dist
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn spectral_norm(m: &DMatrix<f64>) -> f64 {
        m.clone().svd(false, false).singular_values.max()
    }

    #[test]
    fn pbar_frozen_values() {
        let (c, pbar) = compute_pbar(2, 1.0).unwrap();
        assert_abs_diff_eq!(c, 0.5);
        assert_abs_diff_eq!(pbar, 32.0 / 3.0, epsilon = 1e-12);
        let (c, pbar) = compute_pbar(3, 0.5).unwrap();
        assert_abs_diff_eq!(c, 0.9375);
        assert_abs_diff_eq!(pbar, 192.0, epsilon = 1e-9);
    }

    #[test]
    fn pbar_domain_and_monotonicity() {
        assert!(compute_pbar(1, 0.5).is_err());
        assert!(compute_pbar(3, 0.0).is_err());
        assert!(compute_pbar(3, 1.5).is_err());
        assert!(compute_pbar(3, f64::NAN).is_err());
        let p32 = compute_pbar(3, 0.2).unwrap().1;
        let p42 = compute_pbar(4, 0.2).unwrap().1;
        let p31 = compute_pbar(3, 0.1).unwrap().1;
        assert!(p42 > p32, "pbar should grow with N");
        assert!(p31 > p32, "pbar should grow as eta shrinks");
    }

    #[test]
    fn projection_is_idempotent_and_fixes_consensus() {
        let dims = Dims::new(vec![2, 1, 3]).unwrap();
        let a = ProjectionA::new(&dims);
        let m = a.matrix();
        assert_eq!(m.nrows(), 18);
        assert_abs_diff_eq!((&m * &m - &m).norm(), 0.0);
        // A(1 (x) v) = 1 (x) v.
        let v = [0.3, -1.0, 2.0, 0.7, 0.1, -0.4];
        let mut stacked = Vec::new();
        for _ in 0..3 {
            stacked.extend_from_slice(&v);
        }
        assert_eq!(a.apply(&stacked), stacked);
        // Operator form agrees with the dense matrix on a generic vector.
        let x: Vec<f64> = (0..18).map(|i| (i as f64).sin()).collect();
        let via_matrix = &m * DVector::from_vec(x.clone());
        let via_apply = a.apply(&x);
        for (p, q) in via_apply.iter().zip(via_matrix.iter()) {
            assert_abs_diff_eq!(p, q);
        }
    }

    /// Line graph 0 - 1 - 2, scalar actions, no trimming, observation
    /// self-loops only: every row is either a selector (own coordinate) or a
    /// uniform average over the closed neighborhood.
    fn line_graph_rows() -> Vec<Vec<Vec<f64>>> {
        let h = 0.5;
        let t = 1.0 / 3.0;
        vec![
            vec![vec![1.0, 0.0, 0.0], vec![h, h, 0.0], vec![h, h, 0.0]],
            vec![vec![t, t, t], vec![0.0, 1.0, 0.0], vec![t, t, t]],
            vec![vec![0.0, h, h], vec![0.0, h, h], vec![0.0, 0.0, 1.0]],
        ]
    }

    #[test]
    fn hand_assembled_line_graph_matrix() {
        let dims = Dims::uniform(3, 1).unwrap();
        let w = assemble_wbar(&dims, 0, &line_graph_rows()).unwrap();
        let h = 0.5;
        let t = 1.0 / 3.0;
        #[rustfmt::skip]
        let expected = DMatrix::from_row_slice(9, 9, &[
            1.0, 0.0, 0.0,  0.0, 0.0, 0.0,  0.0, 0.0, 0.0,
            0.0, h,   0.0,  0.0, h,   0.0,  0.0, 0.0, 0.0,
            0.0, 0.0, h,    0.0, 0.0, h,    0.0, 0.0, 0.0,
            t,   0.0, 0.0,  t,   0.0, 0.0,  t,   0.0, 0.0,
            0.0, 0.0, 0.0,  0.0, 1.0, 0.0,  0.0, 0.0, 0.0,
            0.0, 0.0, t,    0.0, 0.0, t,    0.0, 0.0, t,
            0.0, 0.0, 0.0,  h,   0.0, 0.0,  h,   0.0, 0.0,
            0.0, 0.0, 0.0,  0.0, h,   0.0,  0.0, h,   0.0,
            0.0, 0.0, 0.0,  0.0, 0.0, 0.0,  0.0, 0.0, 1.0,
        ]);
        assert_abs_diff_eq!((&w.matrix - &expected).norm(), 0.0);
    }

    #[test]
    fn wbar_invariants() {
        let dims = Dims::uniform(3, 1).unwrap();
        let w = assemble_wbar(&dims, 0, &line_graph_rows()).unwrap().matrix;
        let a = ProjectionA::new(&dims).matrix();
        // Consensus vectors are fixed.
        let v = [1.7, -0.3, 0.9];
        let mut consensus = Vec::new();
        for _ in 0..3 {
            consensus.extend_from_slice(&v);
        }
        let fixed = &w * DVector::from_vec(consensus.clone());
        for (p, q) in fixed.iter().zip(&consensus) {
            assert_abs_diff_eq!(p, q, epsilon = 1e-15);
        }
        // A W = W A = A.
        assert_abs_diff_eq!(spectral_norm(&(&a * &w - &a)), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(spectral_norm(&(&w * &a - &a)), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn assembly_rejects_bad_rows() {
        let dims = Dims::uniform(2, 1).unwrap();
        let bad_sum = vec![
            vec![vec![0.7, 0.2], vec![0.5, 0.5]],
            vec![vec![0.5, 0.5], vec![0.5, 0.5]],
        ];
        assert!(matches!(
            assemble_wbar(&dims, 0, &bad_sum),
            Err(AnalysisError::RowSumViolation { agent: 0, coordinate: 0, .. })
        ));
        let negative = vec![
            vec![vec![1.2, -0.2], vec![0.5, 0.5]],
            vec![vec![0.5, 0.5], vec![0.5, 0.5]],
        ];
        assert!(matches!(
            assemble_wbar(&dims, 0, &negative),
            Err(AnalysisError::NegativeWeight { agent: 0, .. })
        ));
        let wrong_shape = vec![vec![vec![1.0, 0.0], vec![0.0, 1.0]]];
        assert!(matches!(
            assemble_wbar(&dims, 0, &wrong_shape),
            Err(AnalysisError::ShapeMismatch(_))
        ));
    }

    #[test]
    fn transition_product_conventions() {
        let dims = Dims::uniform(3, 1).unwrap();
        let w = assemble_wbar(&dims, 0, &line_graph_rows()).unwrap();
        let single = transition_product(std::slice::from_ref(&w)).unwrap();
        assert_abs_diff_eq!((&single - &w.matrix).norm(), 0.0);

        let id = StackedWeightMatrix { round: 0, matrix: DMatrix::identity(9, 9) };
        let ids = vec![id.clone(), id.clone(), id];
        let product = transition_product(&ids).unwrap();
        assert_abs_diff_eq!((&product - DMatrix::<f64>::identity(9, 9)).norm(), 0.0);

        assert!(matches!(transition_product(&[]), Err(AnalysisError::EmptyProduct)));

        // Products of averaging matrices stay row-stochastic and fix
        // consensus vectors.
        let reps = vec![w.clone(), w.clone(), w.clone(), w];
        let phi = transition_product(&reps).unwrap();
        for i in 0..9 {
            let row_sum: f64 = (0..9).map(|j| phi[(i, j)]).sum();
            assert_abs_diff_eq!(row_sum, 1.0, epsilon = 1e-12);
        }
    }

    /// Complete graph on 4 scalar agents, no trimming, observation
    /// self-loops only: off-own rows uniform over everyone, own rows
    /// selectors. The static chain contracts geometrically, so P exists.
    fn complete_graph_wbar(dims: &Dims) -> StackedWeightMatrix {
        let q = 0.25;
        let mut rows = Vec::new();
        for i in 0..4 {
            let mut agent_rows = Vec::new();
            for c in 0..4 {
                if c == i {
                    let mut sel = vec![0.0; 4];
                    sel[i] = 1.0;
                    agent_rows.push(sel);
                } else {
                    agent_rows.push(vec![q; 4]);
                }
            }
            rows.push(agent_rows);
        }
        assemble_wbar(dims, 0, &rows).unwrap()
    }

    #[test]
    fn lyapunov_matrices_on_static_complete_graph() {
        let dims = Dims::uniform(4, 1).unwrap();
        let a = ProjectionA::new(&dims);
        let w = complete_graph_wbar(&dims);
        let ws = vec![w.clone(), w.clone(), w.clone()];
        let tol = 1e-10;
        let seq = finite_horizon_P(&ws, &a, tol, 4000).unwrap();
        assert_eq!(seq.p.len(), 4);

        let a_dense = a.matrix();
        let size = 16;
        let i_minus_a = DMatrix::<f64>::identity(size, size) - &a_dense;
        let gram = i_minus_a.transpose() * &i_minus_a;
        for k in 0..3 {
            let lhs = w.matrix.transpose() * &seq.p[k + 1] * &w.matrix;
            let rhs = &seq.p[k] - &gram;
            let residual = spectral_norm(&(lhs - rhs));
            assert!(residual <= 1e-8, "recursion residual {residual} at k = {k}");
        }

        // Null space contains consensus vectors.
        let v = [2.0, -1.0, 0.5, 3.0];
        let mut consensus = Vec::new();
        for _ in 0..4 {
            consensus.extend_from_slice(&v);
        }
        let pv = &seq.p[0] * DVector::from_vec(consensus);
        assert!(pv.norm() <= 1e-8, "P times consensus had norm {}", pv.norm());

        // Eigenvalues within [0, pbar] for the matching eta = 1/4.
        let (_, pbar) = compute_pbar(4, 0.25).unwrap();
        for p in &seq.p {
            let eigs = p.clone().symmetric_eigen().eigenvalues;
            assert!(eigs.min() >= -1e-9);
            assert!(eigs.max() <= pbar);
        }
    }

    #[test]
    fn nonconvergent_horizon_reports_error() {
        // A permutation weight matrix never contracts toward consensus.
        let dims = Dims::uniform(2, 1).unwrap();
        let rows = vec![
            vec![vec![0.0, 1.0], vec![0.0, 1.0]],
            vec![vec![1.0, 0.0], vec![1.0, 0.0]],
        ];
        let w = assemble_wbar(&dims, 0, &rows).unwrap();
        let a = ProjectionA::new(&dims);
        let err = finite_horizon_P(&[w], &a, 1e-9, 50).unwrap_err();
        assert!(matches!(err, AnalysisError::NotConverged { .. }));
    }

    fn duo_constants() -> TheoryConstants {
        TheoryConstants::new(2, 0.5, 1.0, 1.0).unwrap()
    }

    #[test]
    fn step_size_matrix_entries() {
        let tc = duo_constants();
        assert_abs_diff_eq!(tc.pbar, 128.0 / 7.0, epsilon = 1e-12);
        let report = step_size_test(&tc, 0.001);
        let pbar = 128.0 / 7.0;
        assert_abs_diff_eq!(report.m[0][0], 0.002 - pbar * 1e-6, epsilon = 1e-15);
        assert_abs_diff_eq!(report.m[0][1], -0.001 * pbar * 1.001, epsilon = 1e-15);
        assert_abs_diff_eq!(
            report.m[1][1],
            1.0 - 0.002 * (pbar - 1.0) - pbar * 1e-6,
            epsilon = 1e-15
        );
        assert!(report.feasible);
        assert!(!step_size_test(&tc, 0.01).feasible);
        assert!(!step_size_test(&tc, -0.001).feasible);
    }

    #[test]
    fn feasible_boundary_is_bracketed() {
        let tc = duo_constants();
        let alpha = max_feasible_alpha(&tc).unwrap();
        assert!(alpha > 0.0);
        assert!(step_size_test(&tc, alpha * 0.999).feasible);
        assert!(!step_size_test(&tc, alpha * 1.001).feasible);

        // A harsher network only shrinks the certifiable step.
        let worse = TheoryConstants::new(4, 0.2, 1.0, 1.0).unwrap();
        let alpha_worse = max_feasible_alpha(&worse).unwrap();
        assert!(alpha_worse < alpha);
    }

    #[test]
    fn constants_validation() {
        assert!(TheoryConstants::new(2, 0.5, 0.0, 1.0).is_err());
        assert!(TheoryConstants::new(2, 0.5, 2.0, 1.0).is_err());
        assert!(TheoryConstants::new(1, 0.5, 1.0, 1.0).is_err());
    }

    #[test]
    fn lyapunov_value_vanishes_exactly_at_replicated_equilibrium() {
        let dims = Dims::uniform(4, 1).unwrap();
        let a = ProjectionA::new(&dims);
        let w = complete_graph_wbar(&dims);
        let seq = finite_horizon_P(&[w], &a, 1e-10, 4000).unwrap();
        let x_star = [1.0, -2.0, 0.5, 0.0];
        let mut consensus = Vec::new();
        for _ in 0..4 {
            consensus.extend_from_slice(&x_star);
        }
        let at_star = lyapunov_value(&seq.p[0], &a, &consensus, &x_star);
        assert_abs_diff_eq!(at_star, 0.0, epsilon = 1e-10);

        let mut perturbed = consensus.clone();
        perturbed[5] += 0.3;
        let off = lyapunov_value(&seq.p[0], &a, &perturbed, &x_star);
        assert!(off > 1e-4, "V should be positive away from equilibrium, got {off}");
    }
}
