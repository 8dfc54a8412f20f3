#![no_main]
use libfuzzer_sys::fuzz_target;
use qdi_core::discord::discord_report;
use qdi_core::io::{parse_state, to_json, StateFile};
use qdi_core::Error;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    match parse_state(text) {
        Ok(state) => {
            let r = discord_report(&state);
            assert!(r.q_a >= 0.0 && r.q_a <= r.d_a + 1e-9);
            let again = parse_state(&to_json(&StateFile::from_state(&state))).unwrap();
            assert_eq!(again, state);
        }
        Err(Error::Parse(_) | Error::InvalidState(_) | Error::NotAState { .. }) => {}
        Err(e) => panic!("unexpected error kind: {e}"),
    }
});
