use std::process::ExitCode;

fn main() -> ExitCode {
    hsc::cli::run()
}
