fn main() {
    std::process::exit(hoelder_lab::cli::cli_main(std::env::args_os()));
}
