//! Runs the adversary-free 8-agent baseline and prints how fast the agents'
//! actions approach the centralized Nash equilibrium.

use nesim::scenario;
use nesim::sim::{run, AssumptionMode};

fn main() {
    let config = scenario::builtin("baseline-noadv-8").unwrap();
    let outcome = run(&config, AssumptionMode::Strict).unwrap();

    println!("scenario: {}", outcome.scenario);
    println!("{:>8} {:>14} {:>14}", "round", "dist_to_ne", "consensus_err");
    let mut next = 0;
    for m in &outcome.metrics {
        if m.round >= next || m.round == outcome.rounds_run {
            println!("{:>8} {:>14.6e} {:>14.6e}", m.round, m.dist_to_ne, m.consensus_err);
            next = if next == 0 { 1 } else { next * 4 };
        }
    }
    println!("exit: {:?}", outcome.exit);

    let oracle = outcome.ne_oracle.as_ref().expect("quadratic game has an oracle");
    println!("\n{:>6} {:>12} {:>12}", "agent", "action", "equilibrium");
    for (i, (a, b)) in outcome
        .final_actions
        .as_slice()
        .iter()
        .zip(oracle.as_slice())
        .enumerate()
    {
        println!("{i:>6} {a:>12.8} {b:>12.8}");
    }
}
