fn main() {
    std::process::exit(maskopt::cli::run());
}
