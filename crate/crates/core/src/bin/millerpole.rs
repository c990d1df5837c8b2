fn main() {
    std::process::exit(millerpole::cli::run_from(std::env::args_os()));
}
