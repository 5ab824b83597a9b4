fn main() {
    std::process::exit(lqme::cli::main_with_args(std::env::args_os()));
}
