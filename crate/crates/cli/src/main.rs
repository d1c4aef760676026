fn main() {
    std::process::exit(refd_cli::cli_main(std::env::args_os()));
}
