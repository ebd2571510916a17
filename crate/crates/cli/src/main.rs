use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tracecoef_cli::config::PRECISION_ENV;
use tracecoef_cli::{run, CliError, Command, FileConfig, Format, RunConfig};

/// Finite parts, residues and resolvent-trace coefficients of classical symbols.
#[derive(Parser)]
#[command(name = "tracecoef", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Finite-part density TR_x of --symbol
    Fp,
    /// Residue density of --symbol (and res_x,0 of a·log p with --p)
    Res,
    /// Expansion of log p for --p
    Logsym,
    /// Large-λ expansion of tr a(|D|^m + 1 − λ)^{−N}
    Expand,
    /// Basic coefficient C0(a, p); p defaults to |ξ|^m + 1
    C0,
    /// C0(a, p) − C0(a, p2) from residues
    Defect,
    /// Fit the expansion to numeric traces and compare
    Fit,
    /// Run the acceptance suite
    Verify,
}

#[derive(Args)]
struct Flags {
    /// Dimension n
    #[arg(long, global = true)]
    n: Option<usize>,
    /// Matrix size
    #[arg(long = "M", global = true)]
    matrix_size: Option<usize>,
    /// Symbol a, e.g. "xi1^2/|xi|^3; 2*|xi|^(-1/2)"
    #[arg(long, global = true)]
    symbol: Option<String>,
    /// Elliptic symbol p
    #[arg(long, global = true)]
    p: Option<String>,
    /// Second elliptic symbol for `defect`
    #[arg(long, global = true)]
    p2: Option<String>,
    /// Order of the model operator |ξ|^m + 1
    #[arg(long, global = true)]
    m: Option<u32>,
    /// Resolvent power
    #[arg(long = "N", global = true)]
    power: Option<u32>,
    /// Truncation of log p
    #[arg(long = "J", global = true)]
    truncation: Option<u32>,
    /// Lowest exponent reported by `expand`
    #[arg(long, global = true, allow_hyphen_values = true)]
    floor: Option<String>,
    /// Working precision in decimal digits
    #[arg(long, global = true)]
    precision: Option<u32>,
    /// json, csv or pretty
    #[arg(long, global = true)]
    format: Option<Format>,
    /// Write the report here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Ray angle for `fit`
    #[arg(long, global = true, allow_hyphen_values = true)]
    theta: Option<f64>,
    /// Ladder depth, or slots like "-1:1,-1,-5/4"
    #[arg(long, global = true, allow_hyphen_values = true)]
    ladder: Option<String>,
    /// TOML file with defaults for any of these flags
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Criteria to run in `verify` (keys or ids, comma separated)
    #[arg(long, global = true, value_delimiter = ',')]
    only: Vec<String>,
    #[arg(long, hide = true, global = true)]
    corrupt_alpha: bool,
}

impl Cmd {
    fn command(self) -> Command {
        match self {
            Cmd::Fp => Command::Fp,
            Cmd::Res => Command::Res,
            Cmd::Logsym => Command::Logsym,
            Cmd::Expand => Command::Expand,
            Cmd::C0 => Command::C0,
            Cmd::Defect => Command::Defect,
            Cmd::Fit => Command::Fit,
            Cmd::Verify => Command::Verify,
        }
    }
}

fn configure(cli: Cli) -> Result<RunConfig, CliError> {
    let f = cli.flags;
    let file = match &f.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let flags = FileConfig {
        n: f.n,
        matrix_size: f.matrix_size,
        symbol: f.symbol,
        p: f.p,
        p2: f.p2,
        m: f.m,
        power: f.power,
        truncation: f.truncation,
        floor: f.floor,
        precision: f.precision,
        format: f.format,
        out: f.out,
        theta: f.theta,
        ladder: f.ladder,
        t0: None,
        ratio: None,
        only: if f.only.is_empty() {
            None
        } else {
            Some(f.only)
        },
    };
    let env = std::env::var(PRECISION_ENV).ok();
    let mut cfg = RunConfig::resolve(cli.command.command(), flags.over(file), env.as_deref())?;
    cfg.corrupt_alpha = f.corrupt_alpha;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    let result = configure(cli).and_then(|cfg| {
        let out = run(&cfg)?;
        let text = out.render(cfg.format);
        match &cfg.out {
            Some(path) => std::fs::write(path, text)?,
            None => std::io::stdout().write_all(text.as_bytes())?,
        }
        Ok(out.ok)
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
