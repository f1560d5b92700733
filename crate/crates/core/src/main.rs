fn main() {
    std::process::exit(walkmix::cli::run(std::env::args_os()));
}
