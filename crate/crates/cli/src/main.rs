fn main() {
    std::process::exit(hyperperc_cli::main_with(std::env::args_os()));
}
