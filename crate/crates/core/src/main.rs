fn main() {
    std::process::exit(rough_morrey::cli::run(std::env::args_os()));
}
