fn main() {
    std::process::exit(localreg::cli::run(std::env::args_os()));
}
