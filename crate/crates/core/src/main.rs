fn main() {
    std::process::exit(fairir::cli::run(std::env::args_os()));
}
