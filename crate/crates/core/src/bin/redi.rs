fn main() {
    std::process::exit(redi::cli::run(std::env::args_os()));
}
