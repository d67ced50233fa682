fn main() -> std::process::ExitCode {
    qspectral::cli::main()
}
