fn main() {
    std::process::exit(crosspoly_cli::main_with_args(std::env::args_os()));
}
