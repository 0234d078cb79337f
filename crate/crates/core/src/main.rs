fn main() {
    std::process::exit(cwqpt::cli::run(std::env::args_os()));
}
