fn main() {
    std::process::exit(sketchlevel::cli::run(std::env::args_os()));
}
