fn main() {
    std::process::exit(sitelens::cli::run(std::env::args_os()));
}
