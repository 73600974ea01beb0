fn main() {
    std::process::exit(dyadic_walsh::experiments::cli_main(std::env::args_os()));
}
