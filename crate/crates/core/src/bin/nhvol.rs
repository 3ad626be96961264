fn main() {
    std::process::exit(nhvol::cli::main_with_args(std::env::args_os()));
}
