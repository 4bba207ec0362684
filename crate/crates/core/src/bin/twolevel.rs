fn main() {
    std::process::exit(twolevel_control::cli::main_with_args(std::env::args_os()));
}
