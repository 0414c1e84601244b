fn main() {
    std::process::exit(wavecross_cli::main_with_args(std::env::args_os()));
}
