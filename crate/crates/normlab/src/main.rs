fn main() {
    std::process::exit(normlab::run(std::env::args_os()));
}
