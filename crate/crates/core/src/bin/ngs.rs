fn main() {
    std::process::exit(ngs::cli::run(std::env::args_os()));
}
