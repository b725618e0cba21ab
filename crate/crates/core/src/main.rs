fn main() {
    std::process::exit(photonpress::cli::run(std::env::args_os()));
}
