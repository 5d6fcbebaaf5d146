fn main() {
    std::process::exit(syrisk::cli::main_with(std::env::args_os()));
}
