fn main() {
    let code = ctp_alm::cli::run(std::env::args_os());
    std::process::exit(code);
}
