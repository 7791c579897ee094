fn main() -> std::process::ExitCode {
    roco::cli::main()
}
