fn main() {
    std::process::exit(vrd_cli::main_with_args(std::env::args_os()));
}
