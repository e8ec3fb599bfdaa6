fn main() {
    std::process::exit(frac_smith::cli::run(std::env::args_os()));
}
