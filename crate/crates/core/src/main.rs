fn main() {
    std::process::exit(heislat::cli::run(std::env::args_os()));
}
