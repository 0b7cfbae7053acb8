#![no_main]

use libfuzzer_sys::fuzz_target;
use pla_core::realfield::QuadraticIrrational;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(c) = text.parse::<QuadraticIrrational>() {
        let again: QuadraticIrrational = c.to_string().parse().expect("display parses back");
        assert_eq!(again, c);
        assert!(c.to_f64().is_finite());
    }
});
