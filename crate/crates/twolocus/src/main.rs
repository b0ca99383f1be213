fn main() {
    std::process::exit(twolocus::cli::run(std::env::args()));
}
