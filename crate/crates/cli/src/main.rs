fn main() {
    std::process::exit(qlcheck_cli::main_from(std::env::args_os()));
}
