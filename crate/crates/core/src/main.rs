fn main() {
    std::process::exit(mhbound::cli::main_with_args(std::env::args_os()));
}
