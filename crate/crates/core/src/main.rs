fn main() {
    std::process::exit(extsumm::cli::dispatch(std::env::args_os()));
}
