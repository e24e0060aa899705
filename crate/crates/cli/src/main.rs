fn main() {
    std::process::exit(coa_cli::run(std::env::args_os()).code());
}
