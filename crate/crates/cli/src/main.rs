use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use lowk_cli::{run, Command, RunConfig};

/// Low-energy Green-function expansions for asymptotically periodic potentials.
#[derive(Debug, Parser)]
#[command(name = "lowk", version)]
struct Args {
    /// expand | exact | compare | bands | generic
    #[arg(long)]
    command: Command,
    /// Potential config file
    #[arg(long)]
    potential: PathBuf,
    #[arg(long, allow_negative_numbers = true)]
    x: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    y: Option<f64>,
    #[arg(long, default_value_t = 0.01)]
    k_min: f64,
    #[arg(long, default_value_t = 3.0)]
    k_max: f64,
    #[arg(long, default_value_t = 200)]
    k_steps: usize,
    #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
    order: i32,
    /// Output CSV path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let a = Args::parse();
    let config = RunConfig {
        command: a.command,
        potential_path: a.potential,
        x: a.x,
        y: a.y,
        k_min: a.k_min,
        k_max: a.k_max,
        k_steps: a.k_steps,
        order: a.order,
        output_path: a.out,
    };
    match run(&config) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
