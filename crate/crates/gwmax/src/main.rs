fn main() {
    std::process::exit(gwmax::cli::run(std::env::args_os()));
}
