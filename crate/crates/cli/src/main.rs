fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("TWINSIGHT_LOG", "warn")).init();
    std::process::exit(twinsight_cli::run_cli(std::env::args_os()));
}
