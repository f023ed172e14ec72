use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(faceagg_cli::run(std::env::args()) as u8)
}
