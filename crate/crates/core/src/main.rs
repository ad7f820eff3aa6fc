fn main() {
    std::process::exit(nwidth::cli::main_from(std::env::args_os()));
}
