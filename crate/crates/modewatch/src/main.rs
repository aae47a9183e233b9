fn main() {
    std::process::exit(modewatch::cli::run());
}
