fn main() {
    env_logger::init();
    std::process::exit(home_platform::cli::run(std::env::args_os()));
}
