fn main() {
    std::process::exit(kobpath_cli::run(std::env::args_os()));
}
