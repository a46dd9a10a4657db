#![no_main]

use corpus_scope::semantic::{parse_embed_response, parse_health};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|body: &str| {
    if let Ok((dim, rows)) = parse_embed_response(body) {
        assert!(rows.iter().all(|r| r.dim() == dim));
    }
    if let Ok(health) = parse_health(body) {
        assert!(health.dim > 0);
    }
});
