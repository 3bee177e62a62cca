use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use toral_cli::{run, Overrides, COMMANDS};

/// Transfer-operator and Monte Carlo statistics for random toral automorphisms.
#[derive(Parser, Debug)]
#[command(name = "toral", version)]
struct Args {
    /// TOML configuration; built-in defaults when omitted.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// One of: constants, variance, sweep, ly-report, simulate-annealed,
    /// simulate-quenched, char-fn, paired-moment, ldp, coboundary.
    #[arg(long, value_name = "NAME")]
    command: String,
    /// Replaces the configured seed list (repeatable).
    #[arg(long = "seed", value_name = "U64")]
    seeds: Vec<u64>,
    /// Artifact prefix: writes <prefix>.<command>.csv and .json.
    #[arg(long, value_name = "PREFIX")]
    output: Option<String>,
    #[arg(long)]
    wp: Option<f64>,
    #[arg(long = "N")]
    n: Option<usize>,
    #[arg(long = "M")]
    m: Option<usize>,
    /// Replaces the lambda grid (repeatable).
    #[arg(long = "lambda")]
    lambdas: Vec<f64>,
    #[arg(long = "L")]
    l: Option<f64>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long = "kmax")]
    k_max: Option<usize>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    if !COMMANDS.contains(&args.command.as_str()) {
        eprintln!(
            "error: unknown command `{}` (expected one of {})",
            args.command,
            COMMANDS.join(", ")
        );
        return ExitCode::from(1);
    }
    let overrides = Overrides {
        seeds: args.seeds,
        output: args.output,
        wp: args.wp,
        n: args.n,
        m: args.m,
        lambdas: args.lambdas,
        l: args.l,
        p: args.p,
        q: args.q,
        k_max: args.k_max,
    };
    match run(&args.command, args.config.as_deref(), &overrides) {
        Ok(a) => {
            println!("{}", a.csv.display());
            println!("{}", a.json.display());
            if let Some(s) = a.samples {
                println!("{}", s.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
