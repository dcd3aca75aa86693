//! CLI driver: argument parsing, command dispatch, and the exit-code
//! contract (zero only when every requested job completed).

pub mod args;
pub mod commands;
pub mod config;
pub mod util;

use clap::Parser;
use std::process::ExitCode;

pub fn run() -> ExitCode {
    let cli = args::Cli::parse();
    let result = match &cli.cmd {
        args::Cmd::Generate(a) => commands::generate::run(a),
        args::Cmd::BuildTask(a) => commands::build_task::run(a),
        args::Cmd::Train(a) => commands::train::run(a),
        args::Cmd::RunTask(a) => commands::run_task::run(a),
        args::Cmd::Pairwise(a) => commands::pairwise::run(a),
        args::Cmd::Report(a) => commands::report::run(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            util::emit(serde_json::json!({
                "event": "error",
                "message": format!("{e:#}"),
            }));
            ExitCode::FAILURE
        }
    }
}
