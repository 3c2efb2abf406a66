fn main() {
    std::process::exit(circflow::cli::run(std::env::args_os()));
}
