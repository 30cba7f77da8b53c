fn main() {
    std::process::exit(lle_harness::cli::run(std::env::args_os()));
}
