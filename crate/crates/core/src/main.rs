fn main() {
    std::process::exit(loopwave::cli::main());
}
