fn main() {
    std::process::exit(spinescan::cli::main_with_args(std::env::args_os()));
}
