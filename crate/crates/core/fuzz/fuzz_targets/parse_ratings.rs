#![no_main]

use corpus_scope::stats::{parse_ratings, Dimension};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(rows) = parse_ratings(data) {
        for row in rows {
            for dim in Dimension::ALL {
                assert!((1..=5).contains(&row.rating(dim)));
            }
        }
    }
});
