fn main() {
    std::process::exit(ncinterp::cli::run(std::env::args_os()));
}
