fn main() {
    std::process::exit(comono_lab::cli::run(std::env::args_os()));
}
