fn main() {
    std::process::exit(nglab::cli::main_with_args(std::env::args_os()));
}
