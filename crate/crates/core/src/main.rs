fn main() {
    std::process::exit(adaem::cli::main());
}
