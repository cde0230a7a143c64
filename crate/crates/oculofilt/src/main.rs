fn main() {
    std::process::exit(oculofilt::cli::run(std::env::args().collect()));
}
