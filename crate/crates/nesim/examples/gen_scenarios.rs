//! Regenerates the JSON files in `scenarios/` from the built-in scenario
//! definitions. Run after changing a built-in so the committed files stay in
//! sync; a test compares them against the code.

use std::path::Path;

use nesim::scenario::{builtin_file, builtin_names};

fn main() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios");
    std::fs::create_dir_all(&dir).unwrap();
    for name in builtin_names() {
        let path = dir.join(format!("{name}.json"));
        let text = builtin_file(name).unwrap().to_json_string().unwrap();
        std::fs::write(&path, text + "\n").unwrap();
        println!("wrote {}", path.display());
    }
}
