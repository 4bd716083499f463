//! Acceptance suite. Prints one PASS/FAIL line per criterion; run with
//! `--nocapture` to see the lines when everything passes.

use std::path::PathBuf;

use aircomp_validation::{run_all, ValidationOptions};

/// The `aircomp` executable built alongside this test, or `AIRCOMP_BIN`.
fn aircomp_binary() -> PathBuf {
    if let Some(p) = std::env::var_os("AIRCOMP_BIN") {
        return PathBuf::from(p);
    }
    let exe = std::env::current_exe().unwrap();
    let dir = exe.parent().and_then(|deps| deps.parent()).unwrap();
    dir.join(format!("aircomp{}", std::env::consts::EXE_SUFFIX))
}

#[test]
fn acceptance_criteria() {
    let scratch = tempfile::tempdir().unwrap();
    let opts = ValidationOptions {
        scratch_dir: scratch.path().to_path_buf(),
        sweep_binary: Some(aircomp_binary()),
        ..ValidationOptions::default()
    };
    let outcomes = run_all(&opts, |o| println!("{}", o.line()));
    assert_eq!(outcomes.len(), 8);
    let failed: Vec<u8> = outcomes.iter().filter(|o| !o.passed).map(|o| o.id).collect();
    println!("{} of 8 criteria passed", 8 - failed.len());
    assert!(failed.is_empty(), "failed acceptance criteria: {failed:?}");
}
