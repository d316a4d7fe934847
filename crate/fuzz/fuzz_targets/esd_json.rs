#![no_main]

use libfuzzer_sys::fuzz_target;
use lm_spectra::format::{esd_from_json, esd_to_json};

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(e) = esd_from_json(s) {
        assert_eq!(esd_from_json(&esd_to_json(&e)).unwrap(), e);
    }
});
