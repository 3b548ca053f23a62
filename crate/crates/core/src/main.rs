fn main() {
    std::process::exit(clockwork::cli::run(std::env::args_os()));
}
