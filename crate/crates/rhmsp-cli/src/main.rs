fn main() {
    std::process::exit(rhmsp_cli::run(std::env::args_os()));
}
