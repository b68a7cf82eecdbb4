fn main() {
    std::process::exit(superrad::harness::cli_run(std::env::args_os()));
}
