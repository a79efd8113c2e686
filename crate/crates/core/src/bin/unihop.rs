fn main() {
    std::process::exit(unihop::cli::run(std::env::args_os()));
}
