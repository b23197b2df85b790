fn main() {
    std::process::exit(rumor_source::cli::run(std::env::args_os()));
}
