fn main() {
    std::process::exit(hbf_cli::cli::run(std::env::args_os()));
}
