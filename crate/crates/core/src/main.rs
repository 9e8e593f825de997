fn main() -> std::process::ExitCode {
    telsim::cli::main_entry()
}
