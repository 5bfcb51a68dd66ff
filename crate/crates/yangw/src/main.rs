fn main() {
    std::process::exit(yangw::cli::main_with_args(std::env::args_os()));
}
