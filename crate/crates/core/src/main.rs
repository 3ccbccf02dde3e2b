fn main() {
    std::process::exit(hypaq::cli::main());
}
