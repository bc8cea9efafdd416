fn main() {
    std::process::exit(torus_spine_cli::run(std::env::args_os()));
}
