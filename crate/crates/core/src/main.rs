fn main() {
    std::process::exit(detflux::cli::run(std::env::args_os()));
}
