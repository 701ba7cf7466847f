fn main() {
    std::process::exit(spsolve::run(std::env::args_os()));
}
