fn main() {
    std::process::exit(goclust::cli::run(std::env::args_os()));
}
