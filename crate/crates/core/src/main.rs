fn main() -> std::process::ExitCode {
    subtraction_core::cli::main_entry()
}
