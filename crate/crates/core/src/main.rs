fn main() {
    std::process::exit(spectradec::cli::run(std::env::args_os()));
}
