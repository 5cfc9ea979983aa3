#![no_main]
use libfuzzer_sys::fuzz_target;

use rdgalerkin_cli::config::{finalize, PartialConfig};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(partial) = PartialConfig::from_json(text) else {
        return;
    };
    if let Ok(cfg) = finalize(partial, 0) {
        assert!(cfg.dt > 0.0 && cfg.t_end >= 0.0);
        assert!(cfg.solver_config().validate().is_ok());
        assert!(cfg
            .report_times
            .iter()
            .all(|&t| t >= 0.0 && t <= cfg.t_end * (1.0 + 1e-12)));
    }
});
