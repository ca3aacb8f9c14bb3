fn main() {
    std::process::exit(wsav::cli_main(std::env::args_os()));
}
