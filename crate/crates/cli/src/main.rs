fn main() {
    std::process::exit(anyonspectra_cli::run(std::env::args_os()));
}
