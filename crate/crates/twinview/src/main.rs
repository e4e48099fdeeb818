fn main() {
    std::process::exit(twinview::cli::run_from_args(std::env::args_os()));
}
