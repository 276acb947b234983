#![no_main]

use libfuzzer_sys::fuzz_target;
use wilson_core::spec_io::parse_series;

fuzz_target!(|data: &str| {
    let _ = parse_series(data);
});
