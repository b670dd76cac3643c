fn main() {
    std::process::exit(qdiff::harness::main_with(std::env::args_os()));
}
