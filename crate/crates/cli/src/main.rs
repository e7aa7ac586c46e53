mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use paracel_core::harness::FuzzConfig;
use paracel_core::instances::Instance;

use commands::CliError;
use report::{RunReport, EXIT_PASS, EXIT_USAGE};

/// Exact random-cluster correlation polynomials, paracel expansions and
/// the checks built on them.
#[derive(Parser)]
#[command(name = "paracel", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Emit a JSON report instead of text.
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Print M_ef(q), optionally specialized.
    Mpoly {
        graph: PathBuf,
        /// Substitute a rational value for q.
        #[arg(long, value_name = "RATIONAL")]
        at_q: Option<String>,
        /// Edge weights, e.g. `g=1/2,h=3`.
        #[arg(long, value_delimiter = ',', value_name = "ID=VALUE")]
        weights: Vec<String>,
    },
    /// Compare M_ef(1) with the paracel expansion.
    Verify { graph: PathBuf },
    /// List paracels, and with --table the beta | gamma | A | B table.
    Paracels {
        graph: PathBuf,
        #[arg(long)]
        table: bool,
    },
    /// Canonical beta, alpha, alpha' split of a paracel (all paracels by default).
    Split {
        graph: PathBuf,
        #[arg(long, value_delimiter = ',', num_args = 0.., value_name = "IDS")]
        gamma: Option<Vec<String>>,
    },
    /// Check that the lowest q part of M_ef(q) is a perfect square.
    Ust { graph: PathBuf },
    /// Check a quadratic-form decomposition of M_ef(q)/q^2.
    Ansatz {
        /// Graph file; defaults to the bundled graph with --paper.
        graph: Option<PathBuf>,
        #[arg(long, value_name = "FILE", conflicts_with_all = ["paper", "search"])]
        decomp: Option<PathBuf>,
        /// Bundled decomposition: K3, K4_minus_edge or K4.
        #[arg(long, value_name = "NAME", conflicts_with = "search")]
        paper: Option<Instance>,
        /// Look for a decomposition with the greedy heuristic.
        #[arg(long)]
        search: bool,
        #[arg(long, default_value = ".", value_name = "DIR")]
        replay_dir: PathBuf,
    },
    /// Seeded random instances through every check.
    Fuzz {
        /// Maximum vertex count (at least 2).
        #[arg(long)]
        vertices: usize,
        /// Maximum number of unmarked edges.
        #[arg(long)]
        edges: usize,
        #[arg(long)]
        count: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value = ".", value_name = "DIR")]
        replay_dir: PathBuf,
    },
    /// Classify an ordered pair (A, B) of unmarked edge sets.
    Classify {
        graph: PathBuf,
        #[arg(long, value_delimiter = ',', num_args = 0.., value_name = "IDS")]
        a: Vec<String>,
        #[arg(long, value_delimiter = ',', num_args = 0.., value_name = "IDS")]
        b: Vec<String>,
    },
}

fn run(command: Command) -> Result<RunReport, CliError> {
    use commands::*;
    Ok(match command {
        Command::Mpoly {
            graph,
            at_q,
            weights,
        } => cmd_mpoly(&load_graph(&graph)?, at_q.as_deref(), &weights)?,
        Command::Verify { graph } => cmd_verify(&load_graph(&graph)?)?,
        Command::Paracels { graph, table } => cmd_paracels(&load_graph(&graph)?, table)?,
        Command::Split { graph, gamma } => cmd_split(&load_graph(&graph)?, gamma.as_deref())?,
        Command::Ust { graph } => cmd_ust(&load_graph(&graph)?)?,
        Command::Ansatz {
            graph,
            decomp,
            paper,
            search,
            replay_dir,
        } => {
            let g = match (&graph, paper) {
                (Some(path), _) => load_graph(path)?,
                (None, Some(instance)) => instance.graph(),
                (None, None) => return Err(CliError::Usage("a graph file is required".into())),
            };
            let source = match (&decomp, paper, search) {
                (Some(path), _, _) => DecompSource::File(path),
                (None, Some(instance), _) => DecompSource::Paper(instance),
                (None, None, true) => DecompSource::Search,
                (None, None, false) => {
                    return Err(CliError::Usage(
                        "one of --decomp, --paper or --search is required".into(),
                    ))
                }
            };
            cmd_ansatz(&g, source, &replay_dir)?
        }
        Command::Fuzz {
            vertices,
            edges,
            count,
            seed,
            replay_dir,
        } => {
            let config = FuzzConfig {
                max_vertices: vertices,
                max_edges: edges,
                count,
                seed,
            };
            cmd_fuzz(config, &replay_dir)?
        }
        Command::Classify { graph, a, b } => cmd_classify(&load_graph(&graph)?, &a, &b)?,
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return ExitCode::from(if err.use_stderr() {
                EXIT_USAGE
            } else {
                EXIT_PASS
            });
        }
    };
    let start = Instant::now();
    match run(cli.command) {
        Ok(mut report) => {
            report.elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
            report.emit(cli.json)
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
