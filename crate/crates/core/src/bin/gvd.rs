fn main() {
    std::process::exit(gvd::cli::main_with_args(std::env::args_os()));
}
