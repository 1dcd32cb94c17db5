fn main() {
    std::process::exit(citescope::cli::parse_and_run(std::env::args_os()));
}
