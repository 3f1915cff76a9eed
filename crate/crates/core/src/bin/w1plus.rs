fn main() {
    env_logger::init();
    std::process::exit(w1plus::cli::main());
}
