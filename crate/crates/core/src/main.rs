fn main() {
    std::process::exit(gaussian_gabor::cli::run(std::env::args_os()));
}
