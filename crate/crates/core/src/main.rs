fn main() {
    std::process::exit(bdm::cli::run(std::env::args_os()));
}
