#![no_main]
use libfuzzer_sys::fuzz_target;

use rdgalerkin_cli::parse_config;

// Arguments are NUL-separated.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let args: Vec<&str> = text.split('\0').collect();
    // --config reads an arbitrary path from disk
    if args.iter().any(|a| a.starts_with("--config")) {
        return;
    }
    if let Ok(cfg) = parse_config(std::iter::once("rdgalerkin").chain(args)) {
        assert!(cfg.solver_config().validate().is_ok());
        assert!(cfg.grid_points >= 2 && cfg.sample_points >= 2);
    }
});
