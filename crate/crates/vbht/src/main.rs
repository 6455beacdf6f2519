fn main() -> std::process::ExitCode {
    vbht::cli::main()
}
