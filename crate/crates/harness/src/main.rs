fn main() {
    std::process::exit(koszul_harness::cli::run(std::env::args_os()));
}
