fn main() {
    std::process::exit(jsqlj::cli::main_with_args(std::env::args_os()));
}
