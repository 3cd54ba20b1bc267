use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mfg_cli::{exponents_report, parse_config, run, Command, ConfigError, RunConfig, RunError};
use mfg_core::exponents::{format_rational, parse_rational};

#[derive(Parser)]
#[command(name = "mfglab", version, about = "Mean-field-game solver and estimate checker")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Certify the exponent chain for (d, alpha).
    Exponents {
        #[arg(long)]
        d: u32,
        /// Rational, e.g. 1/2.
        #[arg(long)]
        alpha: String,
        /// Print the full certificate as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Solve the coupled system.
    Solve(RunArgs),
    /// Solve, then run the adjoint and the duality check.
    Adjoint(RunArgs),
    /// Full chain: solve, adjoint, every estimate entry.
    Estimates(RunArgs),
    /// Sample the structural assumptions on the configured model.
    CheckAssumptions(RunArgs),
}

#[derive(clap::Args)]
struct RunArgs {
    /// Config file; omitted means all defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides `output_dir` from the config.
    #[arg(long)]
    output: Option<PathBuf>,
}

fn load(args: &RunArgs) -> Result<RunConfig, RunError> {
    let text = match &args.config {
        Some(path) => std::fs::read_to_string(path).map_err(|source| RunError::Io {
            path: path.clone(),
            source,
        })?,
        None => String::new(),
    };
    let mut cfg = parse_config(&text)?;
    if let Some(out) = &args.output {
        cfg.output_dir = out.clone();
    }
    Ok(cfg)
}

fn pipeline(cmd: Command, args: &RunArgs) -> Result<i32, RunError> {
    let cfg = load(args)?;
    let manifest = run(cmd, &cfg)?;
    for f in &manifest.files {
        println!("{}  {}", f.sha256, cfg.output_dir.join(&f.name).display());
    }
    if manifest.failed.is_empty() {
        Ok(0)
    } else {
        eprintln!("failed entries: {}", manifest.failed.join(", "));
        Ok(4)
    }
}

fn exponents(d: u32, alpha: &str, as_json: bool) -> Result<i32, RunError> {
    let alpha = parse_rational(alpha).map_err(|e| ConfigError {
        line: None,
        message: format!("--alpha: {e}"),
    })?;
    let (cert, value) = exponents_report(d, &alpha)?;
    if as_json {
        println!("{}", serde_json::to_string_pretty(&value).expect("certificate serializes"));
    } else if let Some(w) = &cert.witness {
        println!("d = {d}, alpha = {}: feasible", format_rational(&alpha));
        println!("  a = {}, c = {}", format_rational(&w.a), format_rational(&w.c));
        println!("  p = {}, q = {}", format_rational(&w.young.p), format_rational(&w.young.q));
        println!(
            "  theta1 = {}, theta2 = {}",
            format_rational(&w.thetas.theta1),
            format_rational(&w.thetas.theta2)
        );
    } else {
        println!("d = {d}, alpha = {}: infeasible", format_rational(&alpha));
        for v in &cert.violations {
            println!("  {v}");
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Cmd::Exponents { d, alpha, json } => exponents(*d, alpha, *json),
        Cmd::Solve(a) => pipeline(Command::Solve, a),
        Cmd::Adjoint(a) => pipeline(Command::Adjoint, a),
        Cmd::Estimates(a) => pipeline(Command::Estimates, a),
        Cmd::CheckAssumptions(a) => pipeline(Command::CheckAssumptions, a),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
