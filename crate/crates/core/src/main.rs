fn main() {
    std::process::exit(sphash::cli::main());
}
