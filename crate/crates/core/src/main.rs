fn main() {
    std::process::exit(orb_bergman::cli::run(std::env::args_os()));
}
