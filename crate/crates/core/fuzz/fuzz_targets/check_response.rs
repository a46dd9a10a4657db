#![no_main]

use corpus_scope::fluency::parse_check_response;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|body: &str| {
    let _ = parse_check_response(body);
});
