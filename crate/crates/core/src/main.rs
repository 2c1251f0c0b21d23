fn main() {
    std::process::exit(disclab::cli::main());
}
