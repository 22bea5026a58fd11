//! Evaluates the convergence theory's constants: the contraction factor C of
//! long weight-matrix products, the uniform eigenvalue bound pbar, and the
//! step-size certificate built from them.

use nesim::analysis::{compute_pbar, max_feasible_alpha, step_size_test, TheoryConstants};
use nesim::scenario::builtin;

fn main() {
    println!("{:>7} {:>7} {:>14} {:>14}", "agents", "eta", "C", "pbar");
    for (n, eta) in [(2, 1.0), (2, 0.5), (3, 0.5), (6, 0.2), (8, 0.2), (24, 1.0 / 7.0)] {
        let (c, pbar) = compute_pbar(n, eta).unwrap();
        println!("{n:>7} {eta:>7.4} {c:>14.10} {pbar:>14.4e}");
    }

    let config = builtin("duo-2").unwrap();
    let (mu, l) = config.game.estimate_constants().unwrap();
    let tc = TheoryConstants::new(config.num_agents(), config.filter().eta, mu, l).unwrap();
    println!(
        "\nduo-2: mu {mu}, L {l}, C {:.6}, pbar {:.6} ({} agents, eta {})",
        tc.c, tc.pbar, tc.n_agents, tc.eta
    );

    let best = max_feasible_alpha(&tc).unwrap();
    println!("largest certified step size: {best:.6e}\n");

    println!(
        "{:>12} {:>10} {:>14} {:>14}",
        "alpha", "verdict", "leading_minor", "determinant"
    );
    for alpha in [best / 4.0, best / 2.0, best, best * 1.01, best * 4.0] {
        let report = step_size_test(&tc, alpha);
        println!(
            "{alpha:>12.6e} {:>10} {:>14.6e} {:>14.6e}",
            if report.feasible { "ok" } else { "infeasible" },
            report.leading_minor,
            report.determinant
        );
    }
}
