fn main() -> std::process::ExitCode {
    bounce_core::cli::main(std::env::args_os())
}
