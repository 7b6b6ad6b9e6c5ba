fn main() {
    std::process::exit(pweyl::cli::main_with_args(std::env::args_os()));
}
