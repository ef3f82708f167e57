fn main() {
    std::process::exit(qrng::cli::main_with_args(std::env::args_os()));
}
