#![no_main]
use libfuzzer_sys::fuzz_target;

use rdgalerkin::golden::parse_goldens;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(entries) = parse_goldens(text) {
        for e in entries {
            assert!(e.tolerance > 0.0 && e.tolerance.is_finite());
            assert!(e.x.is_finite() && e.t.is_finite() && e.t >= 0.0 && e.value.is_finite());
            assert!(e.source.starts_with("table"));
        }
    }
});
