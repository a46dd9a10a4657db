#![no_main]

use corpus_scope::stats::parse_metric_scores;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(scores) = parse_metric_scores(data) {
        for (_, values) in scores.rows.values() {
            assert_eq!(values.len(), scores.metrics.len());
        }
    }
});
