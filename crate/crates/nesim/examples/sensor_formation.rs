//! The 96-robot formation game: robots on a 12x8 grid coordinate relative
//! positions under quadratic costs while 12 of them broadcast noise.
//! Runs a truncated horizon by default; pass a round count to go further
//! (the full scenario uses 50,000).
//!
//!     cargo run --release --example sensor_formation -- 50000

use nesim::scenario::builtin_file;
use nesim::sim::{run, AssumptionMode};

fn main() {
    let rounds: u64 = std::env::args()
        .nth(1)
        .map(|s| s.parse().expect("round count"))
        .unwrap_or(5000);

    let mut file = builtin_file("sensor-96-analog").unwrap();
    file.run.max_iters = rounds;
    let config = file.into_config().unwrap();
    println!(
        "{} agents, {} adversaries, step size {}",
        config.num_agents(),
        config.adversary_agents().len(),
        config.run_settings().alpha
    );

    // The sampled checker can refute the graph assumptions but not prove
    // them at this size, so the run is started permissively.
    let outcome = run(&config, AssumptionMode::Permissive).unwrap();
    let mut next = 1;
    for m in &outcome.metrics {
        if m.round >= next || m.round == outcome.rounds_run {
            println!("round {:>6}: dist_to_ne {:.6e}", m.round, m.dist_to_ne);
            next *= 2;
        }
    }

    let target = outcome.ne_oracle.as_ref().unwrap();
    let dims = config.dims();
    println!("\nfinal positions of the first grid row (target in parentheses):");
    for agent in 0..4 {
        let pos = &outcome.final_actions.as_slice()[dims.range(agent)];
        let goal = &target.as_slice()[dims.range(agent)];
        println!(
            "  robot {agent}: ({:+.4}, {:+.4})  ({:+.1}, {:+.1})",
            pos[0], pos[1], goal[0], goal[1]
        );
    }
}
