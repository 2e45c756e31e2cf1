fn main() {
    std::process::exit(fracsim::cli_main(std::env::args_os()));
}
