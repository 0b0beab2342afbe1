fn main() {
    std::process::exit(shadowdecomp_cli::run(std::env::args_os()));
}
