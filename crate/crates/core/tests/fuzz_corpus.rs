//! Replays the checked-in fuzz seeds through the same checks the fuzz
//! targets run.

use std::fs;
use std::path::Path;

#[path = "../../../fuzz/src/lib.rs"]
mod checks;

fn replay(target: &str, check: fn(&[u8])) {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../fuzz/corpus")
        .join(target);
    let mut seen = 0;
    for entry in fs::read_dir(&dir).unwrap_or_else(|e| panic!("{}: {e}", dir.display())) {
        let path = entry.unwrap().path();
        check(&fs::read(&path).unwrap());
        seen += 1;
    }
    assert!(seen > 0, "no seeds in {}", dir.display());
}

#[test]
fn config_json_seeds() {
    replay("config_json", checks::config_json);
}

#[test]
fn gamma_grid_seeds() {
    replay("gamma_grid", checks::gamma_grid);
}

#[test]
fn schedule_json_seeds() {
    replay("schedule_json", checks::schedule_json);
}

#[test]
fn gf_decode_seeds() {
    replay("gf_decode", checks::gf_decode);
}
