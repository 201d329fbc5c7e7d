fn main() {
    std::process::exit(foesr::cli::run(std::env::args_os()));
}
