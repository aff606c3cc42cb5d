fn main() {
    std::process::exit(trilattice::report::main_with_args(std::env::args_os()));
}
