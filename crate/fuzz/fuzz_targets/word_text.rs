#![no_main]

use libfuzzer_sys::fuzz_target;
use lm_spectra::words::Word;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(w) = s.parse::<Word>() {
        let c = w.canonicalize();
        assert!(w.equivalent(&c));
        assert_eq!(c.canonical_label(), w.canonical_label());
        let _ = w.sign();
    }
});
