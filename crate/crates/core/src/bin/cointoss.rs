fn main() {
    std::process::exit(cointoss::cli::run(std::env::args_os()));
}
