fn main() {
    std::process::exit(graphtest::cli::main_with_args(std::env::args_os()));
}
