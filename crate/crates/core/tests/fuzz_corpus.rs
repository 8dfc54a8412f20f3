//! Runs the checked-in fuzz corpus through the parsers.

use std::path::Path;

use qdi_core::io::{parse_experiment_config, parse_state, to_json, StateFile};
use qdi_core::Error;

fn corpus(target: &str) -> Vec<(String, String)> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fuzz/corpus").join(target);
    let mut files: Vec<(String, String)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read_to_string(&p).unwrap()))
        .collect();
    files.sort();
    files
}

#[test]
fn state_file_seeds() {
    let files = corpus("state_file");
    assert!(files.len() >= 5);
    for (name, text) in files {
        match parse_state(&text) {
            Ok(state) => assert_eq!(parse_state(&to_json(&StateFile::from_state(&state))).unwrap(), state, "{name}"),
            Err(Error::Parse(_) | Error::InvalidState(_) | Error::NotAState { .. }) => {}
            Err(e) => panic!("{name}: {e}"),
        }
    }
}

#[test]
fn experiment_config_seeds() {
    let files = corpus("experiment_config");
    assert!(files.len() >= 3);
    let mut accepted = 0;
    for (name, text) in files {
        match parse_experiment_config(&text) {
            Ok(cfg) => {
                accepted += 1;
                assert_eq!(parse_experiment_config(&to_json(&cfg)).unwrap(), cfg, "{name}");
            }
            Err(Error::Parse(_) | Error::InvalidConfig(_)) => {}
            Err(e) => panic!("{name}: {e}"),
        }
    }
    assert!(accepted >= 2);
}
