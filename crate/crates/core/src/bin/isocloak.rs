fn main() {
    std::process::exit(isocloak::cli::main_with(std::env::args_os()));
}
