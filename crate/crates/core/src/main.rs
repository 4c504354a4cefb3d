fn main() {
    std::process::exit(coevo::cli::main_with(std::env::args_os()));
}
