fn main() {
    std::process::exit(pdte_core::cli::main());
}
