#![no_main]

use corpus_scope::corpus::{parse_lines, Role};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(corpus) = parse_lines(data, Role::Generated, "fuzz") {
        assert!(!corpus.is_empty());
        assert!(corpus.records().iter().all(|r| !r.is_empty()));
    }
});
