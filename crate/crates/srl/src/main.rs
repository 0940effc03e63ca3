use clap::Parser;

use srl::run_config::{Command, RunConfig};

#[derive(Parser)]
#[command(name = "srl", version, about = "Regular shock reflection laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

fn main() {
    let cli = Cli::parse();
    if let Some(n) = std::env::var("SRL_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global().expect("thread pool");
    }
    let cfg = RunConfig::new(cli.command);
    match srl::commands::run(&cfg) {
        Ok(summary) => println!("{summary}"),
        Err(e) => {
            eprintln!("srl: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
