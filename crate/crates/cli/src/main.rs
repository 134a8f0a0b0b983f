fn main() {
    std::process::exit(cklh_cli::run(std::env::args_os()));
}
