fn main() {
    std::process::exit(chgp::cli::run());
}
