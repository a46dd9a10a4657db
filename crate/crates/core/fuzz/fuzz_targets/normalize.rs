#![no_main]

use corpus_scope::corpus::{normalize, tokenize};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|text: &str| {
    let n = normalize(text);
    assert_eq!(normalize(&n), n);
    let terms = tokenize(&n);
    assert_eq!(terms.join(" "), n);
});
