use std::process::ExitCode;

fn main() -> ExitCode {
    boxdim::cli::main_with_args(std::env::args_os())
}
