#![no_main]

use corpus_scope::semantic::{format_cache_line, parse_cache_line};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|line: &str| {
    if let Ok(entry) = parse_cache_line(line) {
        let again = format_cache_line(&entry.backend_id, entry.key, &entry.embedding);
        assert_eq!(parse_cache_line(&again).unwrap(), entry);
    }
});
