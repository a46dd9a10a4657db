#![no_main]

use corpus_scope::corpus::{parse_csv, Role};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(corpus) = parse_csv(data, "text", Role::Train, "fuzz") {
        assert!(corpus.records().iter().all(|r| !r.is_empty()));
    }
});
