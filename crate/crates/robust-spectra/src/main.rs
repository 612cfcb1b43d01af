fn main() {
    std::process::exit(robust_spectra::cli::cli_main(std::env::args()));
}
