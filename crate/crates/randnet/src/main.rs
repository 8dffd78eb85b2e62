use std::process::ExitCode;

fn main() -> ExitCode {
    randnet::cli::run(std::env::args_os())
}
