fn main() {
    std::process::exit(microloc::cli::main_with_args(std::env::args_os()));
}
