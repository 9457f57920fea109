fn main() {
    std::process::exit(aa_lab::cli::main_with_args(std::env::args()));
}
