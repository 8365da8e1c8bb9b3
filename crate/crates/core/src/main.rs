fn main() {
    std::process::exit(hrkit::cli::run_command(std::env::args_os()));
}
