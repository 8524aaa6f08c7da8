fn main() {
    std::process::exit(gsdma_cli::main_with(std::env::args_os()));
}
