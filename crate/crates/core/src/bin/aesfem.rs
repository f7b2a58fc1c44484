fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    aesfem::harness::init_threads();
    std::process::exit(aesfem::harness::cli::run(std::env::args_os()));
}
