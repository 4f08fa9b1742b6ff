fn main() {
    std::process::exit(latticewave::cli::run(std::env::args_os()));
}
