fn main() {
    std::process::exit(syncnpa::cli::dispatch(std::env::args_os()));
}
