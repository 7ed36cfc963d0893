fn main() {
    std::process::exit(qsslab::run(std::env::args_os()));
}
