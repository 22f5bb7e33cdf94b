fn main() {
    std::process::exit(capra_core::cli::run(std::env::args_os()));
}
