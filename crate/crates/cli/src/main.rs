fn main() {
    std::process::exit(restart_ar_cli::run(std::env::args_os()));
}
