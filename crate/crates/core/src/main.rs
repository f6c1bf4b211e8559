fn main() {
    std::process::exit(tricok::cli::main_with_args(std::env::args_os()));
}
