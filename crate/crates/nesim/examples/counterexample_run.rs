//! A 7-node network that satisfies the adversary-locality and in-degree
//! assumptions but not information robustness: one constant-signal adversary
//! sits on the only bridge between two cliques, and the left clique can
//! never learn the rightmost agent's action.

use nesim::graph::check_assumptions;
use nesim::scenario::builtin;
use nesim::sim::{run, AssumptionMode};

fn main() {
    let config = builtin("counterexample-7").unwrap();
    let report = check_assumptions(
        &config.communication,
        &config.observation,
        &config.adversary_agents(),
        config.filter().d,
    )
    .unwrap();
    println!("{report}\n");

    let outcome = run(&config, AssumptionMode::Permissive).unwrap();
    let far = config.dims().offset(6);
    let truth = outcome.final_actions.as_slice()[far];
    println!("after {} rounds:", outcome.rounds_run);
    for i in 0..3 {
        println!(
            "  agent {i} believes agent 6 plays {:+.6}, actual {truth:+.6}",
            outcome.final_beliefs[i].values[far]
        );
    }
    let last = outcome.metrics.last().unwrap();
    println!(
        "\ndist_to_ne stalls at {:.6} and the worst belief error stays at {:.3}",
        last.dist_to_ne, last.consensus_err
    );
    println!(
        "the trimming filter always discards the adversary's bridge messages, \
         so no information crosses it"
    );
}
