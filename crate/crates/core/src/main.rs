fn main() {
    std::process::exit(zeta_forms::cli::run(std::env::args_os()));
}
