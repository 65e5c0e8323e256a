fn main() {
    std::process::exit(famasel::cli::run(std::env::args_os()));
}
