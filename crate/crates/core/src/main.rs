fn main() {
    std::process::exit(keybind::cli::run(std::env::args_os()));
}
