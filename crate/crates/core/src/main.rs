fn main() {
    std::process::exit(clfermi::cli::run(std::env::args_os()));
}
