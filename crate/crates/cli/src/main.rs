fn main() {
    std::process::exit(dul::run(std::env::args_os()));
}
