fn main() {
    std::process::exit(repopulation::cli::cli_main(std::env::args_os()));
}
