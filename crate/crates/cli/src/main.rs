fn main() {
    std::process::exit(anyonlab_cli::main_with_args(std::env::args_os()));
}
