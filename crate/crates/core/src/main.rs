fn main() {
    std::process::exit(cfmm_axioms::cli::run(std::env::args_os()));
}
