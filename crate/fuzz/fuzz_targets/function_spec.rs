#![no_main]

use libfuzzer_sys::fuzz_target;
use wilson_core::spec_io::parse_function_spec;

fuzz_target!(|data: &str| {
    if let Ok(spec) = parse_function_spec(data) {
        let _ = spec.label();
        let _ = spec.admissible_for_scan();
    }
});
