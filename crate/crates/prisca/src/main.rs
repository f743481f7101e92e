fn main() {
    std::process::exit(prisca::cli::run());
}
