use std::process::ExitCode;

use clap::error::ErrorKind;
use log::LevelFilter;

use rdgalerkin_cli::{parse_config, run_and_emit, CliError, EXIT_OK};

fn main() -> ExitCode {
    let cfg = match parse_config(std::env::args_os()) {
        Ok(cfg) => cfg,
        Err(CliError::Args(e))
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) =>
        {
            let _ = e.print();
            return ExitCode::from(EXIT_OK as u8);
        }
        Err(e) => return fail(e),
    };
    let level = match cfg.verbosity {
        0 => LevelFilter::Warn,
        1 => LevelFilter::Info,
        2 => LevelFilter::Debug,
        _ => LevelFilter::Trace,
    };
    // configured in code only; the environment is never consulted
    env_logger::Builder::new().filter_level(level).init();
    let mut stdout = std::io::stdout().lock();
    match run_and_emit(&cfg, &mut stdout) {
        Ok(_) => ExitCode::from(EXIT_OK as u8),
        Err(e) => fail(e),
    }
}

fn fail(e: CliError) -> ExitCode {
    match &e {
        CliError::Args(inner) => {
            let _ = inner.print();
        }
        other => eprintln!("error: {other}"),
    }
    ExitCode::from(e.exit_code() as u8)
}
