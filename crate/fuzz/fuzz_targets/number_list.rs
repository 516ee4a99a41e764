#![no_main]

use libfuzzer_sys::fuzz_target;
use optgain::cli::parse_list;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(values) = parse_list::<f64>(text) {
        assert!(!values.is_empty());
    }
    let _ = parse_list::<usize>(text);
});
