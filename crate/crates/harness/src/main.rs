fn main() {
    std::process::exit(gelfand_harness::cli::run(std::env::args_os()));
}
