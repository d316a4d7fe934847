#![no_main]

use libfuzzer_sys::fuzz_target;
use lm_spectra::format::matrix_from_coo;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(m) = matrix_from_coo(s) {
        assert!(m.entries.iter().all(|&(i, j, v)| i < j && j < m.dim && v.is_finite()));
    }
});
