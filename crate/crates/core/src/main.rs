fn main() {
    std::process::exit(glekit::cli::main_with(std::env::args_os()));
}
