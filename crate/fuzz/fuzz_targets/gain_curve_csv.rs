#![no_main]

use libfuzzer_sys::fuzz_target;
use optgain::output::{parse_gain_curve, write_gain_curve, LOSSLESS_DIGITS};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(points) = parse_gain_curve(text) else {
        return;
    };
    if points.iter().all(|p| {
        [p.drift, p.expected_wealth, p.riskfree_wealth, p.average_gain]
            .iter()
            .all(|v| v.is_finite())
    }) {
        let mut buf = Vec::new();
        write_gain_curve(&mut buf, &points, LOSSLESS_DIGITS).unwrap();
        let again = parse_gain_curve(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(again, points);
    }
});
