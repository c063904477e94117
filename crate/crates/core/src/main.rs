fn main() {
    std::process::exit(realfactor::textio::run_cli(std::env::args_os()));
}
