fn main() {
    std::process::exit(fullgroup_lab::cli::run(std::env::args().collect()));
}
