use std::process::ExitCode;

fn main() -> ExitCode {
    mcd_cli::run()
}
