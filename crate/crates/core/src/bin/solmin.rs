fn main() {
    std::process::exit(solmin::cli::main_with_args(std::env::args_os()));
}
