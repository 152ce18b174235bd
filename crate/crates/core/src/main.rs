fn main() {
    env_logger::init();
    std::process::exit(hawkes_clt::cli::main_entry());
}
