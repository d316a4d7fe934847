#![no_main]

use libfuzzer_sys::fuzz_target;
use lm_spectra::format::{complex_from_json, complex_to_json};

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(c) = complex_from_json(s) {
        let again = complex_from_json(&complex_to_json(&c).unwrap()).unwrap();
        assert_eq!(again.present_ranks(), c.present_ranks());
    }
});
