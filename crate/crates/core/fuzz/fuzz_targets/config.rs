#![no_main]

use corpus_scope::config::{RunConfig, Settings};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|text: &str| {
    if let Ok(settings) = Settings::parse(text) {
        if let Ok(config) = RunConfig::resolve(&settings, None) {
            let json = serde_json::to_string(&config).unwrap();
            let back: RunConfig = serde_json::from_str(&json).unwrap();
            assert_eq!(back, config);
        }
    }
});
