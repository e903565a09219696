fn main() {
    std::process::exit(dirichlet_tails::cli::main_with_args(std::env::args_os()));
}
