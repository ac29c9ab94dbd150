fn main() {
    std::process::exit(decouple_kit::cli::run(std::env::args_os()));
}
