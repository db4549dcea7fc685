//! Command-line front end: single queries, grid solves, dense oracles and
//! scene validation.

mod args;
mod oracle;
mod output;
mod query;
mod solve;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use args::{OracleArgs, QueryArgs, SolveArgs, ValidateArgs};

/// Exit status of a command that ran to completion.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Ok,
    /// Some query or walk hit its budget; outputs are partial.
    NonConverged,
}

#[derive(Parser)]
#[command(name = "wost-implicit", version, about = "Walk-on-stars on implicit surfaces with interval branch and bound")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one geometric query at a point.
    Query(QueryArgs),
    /// Estimate the solution over a grid of points.
    Solve(SolveArgs),
    /// Answer a query by dense pointwise sampling.
    Oracle(OracleArgs),
    /// Parse and check a scene file.
    Validate(ValidateArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let result = match cli.command {
        Command::Query(a) => query::run(&a, &argv),
        Command::Solve(a) => solve::run(&a, &argv),
        Command::Oracle(a) => oracle::run(&a, &argv),
        Command::Validate(a) => validate(&a),
    };
    match result {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::NonConverged) => {
            eprintln!("warning: a query did not converge within its budget; output is partial");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn validate(a: &ValidateArgs) -> anyhow::Result<Status> {
    let scene = args::load_scene(&a.scene)?;
    let report = scene.validate()?;
    println!("scene: {}", a.scene.display());
    println!("dimension: {}", scene.dim);
    println!("dirichlet: {}", scene.dirichlet.is_some());
    println!("reflecting: {}", scene.reflecting.is_some());
    println!("robin: {}", scene.has_robin());
    println!("dirichlet_samples: {}", report.dirichlet_samples);
    println!("reflecting_samples: {}", report.reflecting_samples);
    println!("min_gradient_norm: {:e}", report.min_gradient_norm);
    if let Some(m) = report.min_robin_coefficient {
        println!("min_robin_coefficient: {m}");
    }
    println!("valid: true");
    Ok(Status::Ok)
}
