#![no_main]

use libfuzzer_sys::fuzz_target;
use optgain::config::parse_config;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(config) = parse_config(text) {
        for key in config.keys() {
            let value = config.get(key).unwrap();
            assert!(!value.is_empty());
            assert!(!value.contains('#'));
            let line = config.line_of(key).unwrap();
            assert!(line >= 1 && line <= text.lines().count());
        }
    }
});
