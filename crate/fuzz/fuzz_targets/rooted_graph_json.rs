#![no_main]

use libfuzzer_sys::fuzz_target;
use lm_spectra::limits::{ball_signature, RootedGraph};

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(g) = RootedGraph::from_json(s) {
        assert_eq!(RootedGraph::from_json(&g.to_json()).unwrap(), g);
        let _ = ball_signature(&g, 16);
    }
});
