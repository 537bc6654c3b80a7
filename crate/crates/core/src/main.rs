fn main() {
    std::process::exit(fracspline::cli::run(std::env::args_os()));
}
