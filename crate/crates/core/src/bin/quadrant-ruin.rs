fn main() {
    env_logger::init();
    std::process::exit(quadrant_ruin::cli::run());
}
