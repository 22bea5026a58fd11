//! Runs one scenario under every adversary policy and channel attack and
//! compares the damage.
//!
//! Two settings are contrasted. In the 6-ring every agent directly observes
//! the agents it talks to, so the d = 1 filter plus observation overrides
//! neutralize a single attacker almost completely. In the two-clique bridge
//! network the attacker is the only path between the cliques, and what it
//! chooses to send decides how much the left clique can ever learn about
//! the right one.

use nesim::adversary::{AdversaryPolicy, ChannelAttack};
use nesim::scenario::{builtin_file, AdversaryEntry, ScenarioFile};
use nesim::sim::{run, AssumptionMode};

fn policies(len: usize) -> [(&'static str, AdversaryPolicy); 6] {
    [
        ("gaussian_noise", AdversaryPolicy::GaussianNoise { sigma: 2.0 }),
        ("constant_signal", AdversaryPolicy::ConstantSignal { values: vec![5.0; len] }),
        ("uniform_random", AdversaryPolicy::UniformRandom { lo: -4.0, hi: 4.0 }),
        ("silent", AdversaryPolicy::Silent),
        ("selfish_deceiver", AdversaryPolicy::SelfishDeceiver { lie_offset: vec![1.5] }),
        ("passthrough", AdversaryPolicy::Passthrough),
    ]
}

fn report(label: &str, file: ScenarioFile) {
    let outcome = run(&file.into_config().unwrap(), AssumptionMode::Permissive).unwrap();
    let last = outcome.metrics.last().unwrap();
    println!(
        "  {label:<22} {:>7} rounds, dist_to_ne {:>10.3e}, fallbacks {}",
        outcome.rounds_run,
        last.dist_to_ne,
        outcome.metrics.iter().map(|m| m.assumption_flags).sum::<u64>()
    );
}

fn main() {
    let dense = || {
        let mut file = builtin_file("ring-6-adv1").unwrap();
        file.run.record_weights = false;
        file.run.max_iters = 4000;
        file.run.tol = 1e-8;
        file.adversaries.clear();
        file
    };
    println!("6-ring, observation graph = communication graph:");
    report("honest", dense());
    for (label, policy) in policies(6) {
        let mut file = dense();
        file.adversaries = vec![AdversaryEntry { agent: 3, policy }];
        report(label, file);
    }

    println!("\n  channel attacks on honest agents:");
    let attacks: [(&str, ChannelAttack); 3] = [
        (
            "drop_link 0<-1 p=0.8",
            ChannelAttack::DropLink { to: 0, from: 1, probability: 0.8 },
        ),
        (
            "jam 0<-1, 1<-2",
            ChannelAttack::Jam { edges: vec![(0, 1), (1, 2)], sigma: 3.0 },
        ),
        (
            "mitm 2<-4 gain 0.5",
            ChannelAttack::ManInTheMiddle {
                to: 2,
                from: 4,
                gain: 0.5,
                offset: vec![0.3; 6],
            },
        ),
    ];
    for (label, attack) in attacks {
        let mut file = dense();
        file.attacks = vec![attack];
        report(label, file);
    }

    // On the bridge network nobody observes node 3, so its messages are the
    // only channel between the cliques; the topology violates information
    // robustness by construction, hence the permissive mode. Whatever node 3
    // sends, the left clique (0, 1, 2) can never learn agent 6's action:
    // node 3's value is always the lone outlier in their inboxes and the
    // filter trims it, so dist_to_ne has a fixed topological floor. The
    // right clique sits next to agent 6 itself and CAN absorb its value,
    // but only when a second above-own value shields it from trimming;
    // bigger lies are better shields, so the attacks that sound worst
    // actually leave the right clique best informed.
    let bridge = || {
        let mut file = builtin_file("counterexample-7").unwrap();
        file.run.max_iters = 4000;
        file.run.tol = 1e-8;
        file.adversaries.clear();
        file
    };
    let report_bridge = |label: &str, file: ScenarioFile| {
        let outcome = run(&file.into_config().unwrap(), AssumptionMode::Permissive).unwrap();
        let last = outcome.metrics.last().unwrap();
        println!(
            "  {label:<22} dist_to_ne {:>10.3e}, node 4's estimate of x6 {:>7.4} (true 2.0), fallbacks {}",
            last.dist_to_ne,
            outcome.final_beliefs[4].values[6],
            outcome.metrics.iter().map(|m| m.assumption_flags).sum::<u64>()
        );
    };
    println!("\ntwo 4-cliques joined only through node 3:");
    report_bridge("honest", bridge());
    for (label, policy) in policies(7) {
        let mut file = bridge();
        file.adversaries = vec![AdversaryEntry { agent: 3, policy }];
        report_bridge(label, file);
    }
}
