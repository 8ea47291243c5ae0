fn main() {
    std::process::exit(nikoopman::cli::run(std::env::args_os()));
}
