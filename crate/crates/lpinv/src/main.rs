fn main() -> std::process::ExitCode {
    lpinv::cli::main_with_args(std::env::args_os())
}
