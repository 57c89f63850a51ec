fn main() {
    std::process::exit(abelian_iso::cli::run(std::env::args_os()));
}
