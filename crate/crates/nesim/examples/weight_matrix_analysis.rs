//! Records the equivalent weight matrices of an adversarial run and checks
//! the linear-algebra facts the convergence proof rests on: products
//! contract toward the consensus projector, the P sequence satisfies its
//! defining recursion below the pbar bound, and the Lyapunov value decays.

use nalgebra::DMatrix;
use nesim::analysis::{
    finite_horizon_P, lyapunov_value, transition_product, ProjectionA, TheoryConstants,
};
use nesim::scenario::builtin_file;
use nesim::sim::{run, AssumptionMode};

fn main() {
    let mut file = builtin_file("ring-6-adv1").unwrap();
    file.run.max_iters = 60;
    let config = file.into_config().unwrap();
    let outcome = run(&config, AssumptionMode::Strict).unwrap();
    let recorded = outcome.recorded.as_ref().unwrap();
    println!("recorded {} rounds of ring-6-adv1", recorded.wbars.len());

    let (mu, l) = config.game.estimate_constants().unwrap();
    let tc = TheoryConstants::new(config.num_agents(), config.filter().eta, mu, l).unwrap();
    let projection = ProjectionA::new(config.dims());
    let a = projection.matrix();

    // Long products approach the projector that replaces every belief with
    // the owner's actual action.
    let window = config.num_agents() - 1;
    println!("\n{:>3} {:>14} {:>14}", "r", "|Phi - A|_inf", "2 C^r");
    for r in 1..=3 {
        let phi = transition_product(&recorded.wbars[..r * window]).unwrap();
        let diff = &phi - &a;
        let norm = diff
            .row_iter()
            .map(|row| row.iter().map(|e| e.abs()).sum::<f64>())
            .fold(0.0, f64::max);
        println!("{r:>3} {norm:>14.6e} {:>14.6e}", 2.0 * tc.c.powi(r as i32));
    }

    let pseq = finite_horizon_P(&recorded.wbars, &projection, 1e-10, 50_000).unwrap();
    let eye = DMatrix::<f64>::identity(a.nrows(), a.ncols());
    let ia = &eye - &a;
    let iata = ia.transpose() * &ia;
    let mut worst_residual: f64 = 0.0;
    let mut worst_eig: f64 = 0.0;
    for (k, w) in recorded.wbars.iter().enumerate() {
        let lhs = w.matrix.transpose() * &pseq.p[k + 1] * &w.matrix;
        let rhs = &pseq.p[k] - &iata;
        worst_residual = worst_residual.max((&lhs - &rhs).abs().max());
        let eigs = pseq.p[k].clone().symmetric_eigen().eigenvalues;
        worst_eig = worst_eig.max(eigs.iter().copied().fold(0.0, f64::max));
    }
    println!("\nP recursion residual (worst entry): {worst_residual:.3e}");
    println!("largest P eigenvalue {worst_eig:.4} stays below pbar {:.4e}", tc.pbar);

    let x_star = outcome.ne_oracle.as_ref().unwrap();
    let values: Vec<f64> = recorded
        .filtered_states
        .iter()
        .enumerate()
        .map(|(k, v)| lyapunov_value(&pseq.p[k + 1], &projection, v, x_star.as_slice()))
        .collect();
    let monotone = values.windows(2).all(|w| w[1] < w[0]);
    println!(
        "\nLyapunov value falls from {:.4e} to {:.4e} ({}monotonically)",
        values.first().unwrap(),
        values.last().unwrap(),
        if monotone { "" } else { "not " }
    );
}
