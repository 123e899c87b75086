use clap::Parser;

use fedboost::cli::{run, Cli};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("FEDBOOST_LOG", "warn")).init();
    if let Err(e) = run(Cli::parse()) {
        eprintln!("fedboost: {e}");
        std::process::exit(e.exit_code());
    }
}
