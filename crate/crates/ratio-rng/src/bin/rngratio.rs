fn main() {
    std::process::exit(ratio_rng::cli::run());
}
