fn main() {
    std::process::exit(hufpar::cli::main());
}
