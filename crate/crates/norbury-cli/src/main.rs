fn main() {
    std::process::exit(norbury_cli::run(std::env::args_os()));
}
