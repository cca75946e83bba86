fn main() {
    std::process::exit(neumann_layers::cli::main());
}
