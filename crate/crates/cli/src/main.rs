use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use anyhow::Result;
use ccreduce_cli::commands::{self, MethodSelector};
use ccreduce_cli::Settings;
use clap::{Args, Parser, Subcommand};

/// Reduce the cognitive complexity of Java methods with minimal Extract Method refactorings.
#[derive(Parser)]
#[command(name = "ccreduce", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Solve {
    /// Complexity threshold every method must meet.
    #[arg(long, default_value_t = 15)]
    threshold: u32,
    /// Seconds allowed per method.
    #[arg(long, default_value_t = 300.0)]
    time_limit: f64,
    /// Enumerate subsets exhaustively instead of branch and bound.
    #[arg(long)]
    oracle: bool,
    /// Worker threads.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

impl Solve {
    fn settings(&self) -> Settings {
        Settings {
            tau: self.threshold,
            time_limit: Duration::from_secs_f64(self.time_limit.max(0.0)),
            use_oracle: self.oracle,
            jobs: self.jobs,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Print the complexity of every method as JSON.
    Analyze {
        path: PathBuf,
        #[arg(long, default_value_t = 15)]
        threshold: u32,
    },
    /// Print the refactoring cache of one method as CSV.
    Cache {
        file: PathBuf,
        /// Class#name, with @k for the k-th overload.
        #[arg(long)]
        method: MethodSelector,
    },
    /// Print the conflict graph of one method as DOT.
    Graph {
        file: PathBuf,
        #[arg(long)]
        method: MethodSelector,
        /// Draw only the transitive reduction of the nesting edges.
        #[arg(long)]
        reduced: bool,
    },
    /// Print the optimization model of one method in LP format.
    Model {
        file: PathBuf,
        #[arg(long)]
        method: MethodSelector,
        #[arg(long, default_value_t = 15)]
        threshold: u32,
    },
    /// Solve every method and write plan files and reports.
    Plan {
        path: PathBuf,
        #[command(flatten)]
        solve: Solve,
        #[arg(long, default_value = "ccreduce-out")]
        out: PathBuf,
    },
    /// Solve, rewrite and verify every method, writing sources under --out.
    Apply {
        path: PathBuf,
        #[command(flatten)]
        solve: Solve,
        #[arg(long)]
        out: PathBuf,
    },
    /// Aggregate statistics over a directory of plan files.
    Report { plans: PathBuf },
    /// Write generated test classes.
    Gen {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        count: u64,
        #[arg(long, default_value_t = 3)]
        depth: usize,
        #[arg(long, default_value_t = 3)]
        width: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> Result<bool> {
    let (text, clean) = match cli.command {
        Command::Analyze { path, threshold } => commands::analyze(&path, threshold)?,
        Command::Cache { file, method } => (commands::cache(&file, &method)?, true),
        Command::Graph { file, method, reduced } => (commands::graph(&file, &method, reduced)?, true),
        Command::Model { file, method, threshold } => (commands::model(&file, &method, threshold)?, true),
        Command::Plan { path, solve, out } => commands::plan(&path, &solve.settings(), &out)?,
        Command::Apply { path, solve, out } => commands::apply(&path, &solve.settings(), &out)?,
        Command::Report { plans } => (commands::report(&plans)?, true),
        Command::Gen { seed, count, depth, width, out } => {
            let files = commands::gen(seed, count, depth, width, &out)?;
            (format!("wrote {} files to {}\n", files.len(), out.display()), true)
        }
    };
    print!("{text}");
    Ok(clean)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
