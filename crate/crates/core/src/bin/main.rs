fn main() -> std::process::ExitCode {
    wbp_active::cli::main()
}
