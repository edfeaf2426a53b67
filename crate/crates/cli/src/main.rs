fn main() {
    std::process::exit(sirgraph_cli::main_with_args(std::env::args_os()));
}
