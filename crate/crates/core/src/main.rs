fn main() {
    std::process::exit(dajc::cli::run(std::env::args_os()));
}
