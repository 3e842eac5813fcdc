fn main() {
    std::process::exit(menid::cli::main());
}
