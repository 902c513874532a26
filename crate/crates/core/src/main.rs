fn main() {
    std::process::exit(carkov::cli::run(std::env::args_os()));
}
