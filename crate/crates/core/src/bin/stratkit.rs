fn main() {
    std::process::exit(stratkit::cli::main_with_args(std::env::args_os()));
}
