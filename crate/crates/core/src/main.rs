use clap::Parser;
use softdeform::cli::{run, Cli};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    if let Err(e) = run(&Cli::parse()) {
        log::error!("{e}");
        std::process::exit(1);
    }
}
