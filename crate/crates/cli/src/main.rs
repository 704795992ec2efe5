fn main() {
    std::process::exit(permcover_cli::dispatch(std::env::args_os()));
}
