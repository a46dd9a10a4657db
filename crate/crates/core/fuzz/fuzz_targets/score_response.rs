#![no_main]

use corpus_scope::fluency::parse_score_response;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|body: &str| {
    if let Ok(scores) = parse_score_response(body) {
        assert!(scores.iter().all(|p| p.is_finite() && *p >= 0.0));
    }
});
