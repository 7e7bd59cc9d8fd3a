use std::process::ExitCode;

use clap::{Parser, Subcommand};

use pareto_recourse_cli::{
    cmd_build_graph, cmd_oracle_check, cmd_sample, cmd_scalability, cmd_shrink, cmd_solve, Outcome, RunConfig,
};

#[derive(Parser)]
#[command(name = "pareto-recourse", version, about = "Pareto-optimal recourse paths over actionability graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Pareto tables and paths from one source to every positive target.
    Solve(RunConfig),
    /// Compare the solver with exhaustive enumeration on random graphs.
    OracleCheck(RunConfig),
    /// Frontier quality on random subsamples of growing size.
    Scalability(RunConfig),
    /// Greedy κ-shrinking of a graph.
    Shrink(RunConfig),
    /// Random ε-net sample with the Haussler-Welzl size.
    Sample(RunConfig),
    /// Build and write the KNN actionability graph.
    BuildGraph(RunConfig),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result: anyhow::Result<Outcome> = match &cli.command {
        Command::Solve(c) => cmd_solve(c),
        Command::OracleCheck(c) => cmd_oracle_check(c),
        Command::Scalability(c) => cmd_scalability(c),
        Command::Shrink(c) => cmd_shrink(c),
        Command::Sample(c) => cmd_sample(c),
        Command::BuildGraph(c) => cmd_build_graph(c),
    };
    match result {
        Ok(outcome) => {
            for line in &outcome.lines {
                println!("{line}");
            }
            for p in &outcome.written {
                println!("wrote {}", p.display());
            }
            if outcome.ok {
                ExitCode::SUCCESS
            } else {
                eprintln!("error: self-check failed");
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
