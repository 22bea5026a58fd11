//! Keeps the committed files in `scenarios/` in sync with the built-in
//! definitions. Regenerate them with `cargo run --example gen_scenarios`
//! after changing a built-in.

use std::path::Path;

use nesim::scenario::{builtin_file, builtin_names, ScenarioFile};
use nesim::sim::{run, AssumptionMode};

#[test]
fn committed_scenario_files_match_the_builtins() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios");
    for name in builtin_names() {
        let path = dir.join(format!("{name}.json"));
        let text = std::fs::read_to_string(&path)
            .unwrap_or_else(|e| panic!("{} should exist ({e})", path.display()));
        let from_disk = ScenarioFile::from_json_str(&text).unwrap();
        assert_eq!(
            from_disk,
            builtin_file(name).unwrap(),
            "{} is stale; rerun `cargo run --example gen_scenarios`",
            path.display()
        );
    }
}

#[test]
fn no_stray_files_sit_next_to_the_committed_scenarios() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios");
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        let stem = path.file_stem().unwrap().to_str().unwrap();
        assert!(
            builtin_names().contains(&stem),
            "unexpected file {}",
            path.display()
        );
    }
}

#[test]
fn scenario_files_load_and_run_a_round_from_disk() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios");
    let mut file =
        ScenarioFile::from_json_str(&std::fs::read_to_string(dir.join("duo-2.json")).unwrap())
            .unwrap();
    file.run.max_iters = 3;
    let outcome = run(&file.into_config().unwrap(), AssumptionMode::Strict).unwrap();
    assert_eq!(outcome.rounds_run, 3);
}
