#![no_main]

use libfuzzer_sys::fuzz_target;
use lm_spectra::format::{esd_from_csv, esd_to_csv};

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(e) = esd_from_csv(s) {
        assert!(e.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        let _ = esd_from_csv(&esd_to_csv(&e));
    }
});
