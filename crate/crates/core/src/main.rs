fn main() {
    std::process::exit(vcdisj::cli::main_entry());
}
