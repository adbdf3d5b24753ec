fn main() {
    std::process::exit(fracconv::cli::run(std::env::args_os()));
}
