fn main() {
    std::process::exit(biharmonic_certify::cli::run(std::env::args_os()));
}
