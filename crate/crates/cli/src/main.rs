fn main() {
    std::process::exit(qlid_cli::app::main_with(std::env::args_os()));
}
