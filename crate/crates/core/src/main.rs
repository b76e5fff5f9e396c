fn main() -> std::process::ExitCode {
    kronlab::cli::main_entry()
}
