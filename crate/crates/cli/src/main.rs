fn main() {
    std::process::exit(superior_cli::cli_main(std::env::args_os()));
}
