mod args;
mod commands;
mod config;
mod error;
mod geometry;
mod output;

use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let argv = match config::expand(std::env::args_os().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("interlace: {e}");
            return ExitCode::from(e.exit_code());
        }
    };
    let cli = args::Cli::parse_from(argv);
    if let Some(n) = cli.common.threads {
        set_threads(n);
    }
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("interlace: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(feature = "parallel")]
fn set_threads(n: usize) {
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
        log::warn!("could not size the thread pool: {e}");
    }
}

#[cfg(not(feature = "parallel"))]
fn set_threads(_: usize) {
    log::warn!("built without the parallel feature; --threads is ignored");
}
