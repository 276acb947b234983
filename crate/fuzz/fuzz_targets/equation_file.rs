#![no_main]

use libfuzzer_sys::fuzz_target;
use wilson_core::diffeq::newton_polygon;
use wilson_core::spec_io::parse_equation;

fuzz_target!(|data: &str| {
    if let Ok(eq) = parse_equation(data) {
        let p = newton_polygon(&eq);
        assert!(p.hull_vertices.len() <= p.points.len());
    }
});
