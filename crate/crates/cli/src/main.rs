fn main() {
    std::process::exit(spinmem_cli::run(std::env::args_os()));
}
