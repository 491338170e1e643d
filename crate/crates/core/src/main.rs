fn main() {
    std::process::exit(abalearn::cli::main());
}
