fn main() -> std::process::ExitCode {
    inccount::cli::main()
}
