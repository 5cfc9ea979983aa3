#![no_main]
use libfuzzer_sys::fuzz_target;

use rdgalerkin_cli::custom::CustomProblem;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(custom) = CustomProblem::from_json(text) else {
        return;
    };
    if let Ok(spec) = custom.to_spec() {
        // accepted problems stay valid and survive a round trip
        assert!(spec.validate().is_ok());
        let again = CustomProblem::from_json(&CustomProblem::from(&spec).to_json()).unwrap();
        assert_eq!(again.to_spec().unwrap(), spec);
    }
});
