fn main() {
    std::process::exit(ramanujan_parseval::cli::run(std::env::args_os()));
}
