use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;

#[derive(Parser, Debug)]
#[command(name = "vario", version, about = "Variogram construction, permissibility checks and kriging")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// List catalog atoms with parameter ranges and class tags.
    Catalog {
        /// Emit JSON instead of a text table.
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Evaluate a model at given arguments.
    Eval {
        #[command(flatten)]
        model: ModelArgs,
        /// Argument vector, comma separated; repeat for several.
        #[arg(long = "at", required = true, allow_hyphen_values = true)]
        at: Vec<String>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Run permissibility checks; exit 0 pass, 1 fail, 2 inconclusive.
    Validate {
        #[command(flatten)]
        model: ModelArgs,
        /// Site CSV with header `x1,...,xd[,value]`; random sites when absent.
        #[arg(long)]
        points: Option<PathBuf>,
        /// Number of random sites drawn when `--points` is absent.
        #[arg(long, default_value_t = 10)]
        n: usize,
        /// Comma-separated checks: cnd, pd, axioms, sqrt_subadditivity,
        /// cm, bernstein, polya, profile_shape, period.
        #[arg(long)]
        checks: Option<String>,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Materialize a construction recipe into a model document.
    Construct {
        /// Recipe JSON (inline or file) with a `constructor` field.
        #[arg(long = "model", alias = "recipe")]
        model: String,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Tabulate a model on a regular grid as CSV.
    Grid {
        #[command(flatten)]
        model: ModelArgs,
        /// Axes `lo:hi:n`, comma separated, one per dimension.
        #[arg(long, allow_hyphen_values = true)]
        grid: String,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Ordinary kriging at one or more targets.
    Krige {
        #[command(flatten)]
        model: ModelArgs,
        /// Site CSV with a `value` column.
        #[arg(long)]
        points: PathBuf,
        /// Target vector, comma separated; repeat for several.
        #[arg(long = "target", allow_hyphen_values = true)]
        target: Vec<String>,
        /// Regular target grid `lo:hi:n,...` in place of `--target`.
        #[arg(long, allow_hyphen_values = true)]
        grid: Option<String>,
        #[arg(long, default_value = "dense")]
        mode: String,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Simulate a Gaussian field and report its empirical variogram as CSV.
    Simulate {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        points: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        replicates: usize,
        /// Lag bin edges `lo:hi:n` (n edges) or an explicit comma list.
        #[arg(long)]
        bins: Option<String>,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        /// Also write the replicate matrix (one row per replicate) here.
        #[arg(long)]
        fields: Option<PathBuf>,
        #[command(flatten)]
        out: OutArgs,
    },
}

#[derive(Args, Debug)]
struct ModelArgs {
    /// Model JSON, inline or a file path.
    #[arg(long)]
    model: String,
}

#[derive(Args, Debug)]
struct OutArgs {
    /// Output path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Inline JSON when it looks like JSON, otherwise a file to read.
fn read_json_arg(arg: &str) -> Result<serde_json::Value, String> {
    let trimmed = arg.trim_start();
    let text = if trimmed.starts_with('{') || trimmed.starts_with('[') || trimmed.starts_with('"') {
        arg.to_string()
    } else {
        std::fs::read_to_string(arg).map_err(|e| format!("cannot read `{arg}`: {e}"))?
    };
    serde_json::from_str(&text).map_err(|e| format!("invalid JSON in `{arg}`: {e}"))
}

fn write_output(out: &OutArgs, text: &str) -> Result<(), String> {
    match &out.out {
        Some(p) => write_file(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn write_file(p: &Path, text: &str) -> Result<(), String> {
    std::fs::write(p, text).map_err(|e| format!("cannot write `{}`: {e}", p.display()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
