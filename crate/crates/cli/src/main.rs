fn main() {
    std::process::exit(percap_cli::run(std::env::args_os()));
}
