fn main() {
    std::process::exit(mnw::cli::run(std::env::args_os()));
}
