fn main() {
    std::process::exit(wic::cli::run(std::env::args_os()));
}
