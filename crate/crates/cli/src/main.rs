//! idxsel: benchmark index structures, train a selection policy, and
//! pick the best configuration for a workload.

mod cmd;
mod manifest;
mod opts;

use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    // Die quietly when a downstream pipe closes instead of panicking on
    // EPIPE; Rust ignores SIGPIPE by default.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = opts::Cli::parse();
    match cmd::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
