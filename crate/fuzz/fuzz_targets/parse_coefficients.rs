#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(coefficients) = tloss_core::dataset::parse_coefficients_str(text) {
        assert!(!coefficients.is_empty());
        assert!(coefficients.iter().all(|c| c.is_finite()));
    }
});
