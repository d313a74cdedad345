use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(noisecal::cli::run(std::env::args_os()))
}
