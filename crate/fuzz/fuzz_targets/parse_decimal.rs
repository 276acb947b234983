#![no_main]

use libfuzzer_sys::fuzz_target;
use wilson_core::combinatorics::rational_string;
use wilson_core::spec_io::parse_decimal;

fuzz_target!(|data: &str| {
    if let Ok(q) = parse_decimal(data) {
        assert_eq!(parse_decimal(&rational_string(&q)).unwrap(), q);
    }
});
