//! `sobmuck`: Muckenhoupt constants, measure classification, boundedness
//! decisions and Sobolev polynomial numerics from measure spec files.
//!
//! Exit codes: 0 ok, 2 parse error, 3 precondition error, 4 internal error.

mod commands;
mod config;
mod error;
mod output;
mod spec;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use config::{Manifest, RunConfig, MANIFEST_NAME};
use error::CliError;
use output::{to_json, write_atomic};

#[derive(Parser, Debug)]
#[command(name = "sobmuck", version, about = "Multiplication operator boundedness on polynomial Sobolev spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Exponent p in (1, inf).
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    /// Base grid size (power of two, at least 64).
    #[arg(long, default_value_t = 4096)]
    grid: usize,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Largest polynomial degree for `sop`.
    #[arg(long, default_value_t = 6)]
    degree: usize,
    /// Largest n for sequences.
    #[arg(long, default_value_t = 25)]
    nmax: usize,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum EndpointArg {
    A,
    B,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum VariantArg {
    Lambda,
    Prime,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Muckenhoupt constant of (nu1, nu2) at an endpoint.
    Lambda {
        #[arg(long)]
        nu1: PathBuf,
        #[arg(long)]
        nu2: PathBuf,
        #[arg(long, value_enum, default_value_t = EndpointArg::B)]
        endpoint: EndpointArg,
        #[arg(long, value_enum, default_value_t = VariantArg::Lambda)]
        variant: VariantArg,
        #[command(flatten)]
        common: Common,
    },
    /// Regular points and piecewise decomposition of mu1.
    Classify {
        #[arg(long)]
        mu1: PathBuf,
        #[arg(long)]
        mu0: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Boundedness verdict with certificate.
    Decide {
        #[arg(long)]
        mu0: PathBuf,
        #[arg(long)]
        mu1: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Monic orthogonal (p = 2) or extremal polynomials and their zeros.
    Sop {
        #[arg(long)]
        mu0: PathBuf,
        #[arg(long)]
        mu1: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Multiplication operator norms on P_n.
    Mnorm {
        #[arg(long)]
        mu0: PathBuf,
        #[arg(long)]
        mu1: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Zeros against the disk of radius 2 ||M||_n.
    Verify {
        #[arg(long)]
        mu0: PathBuf,
        #[arg(long)]
        mu1: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Ratios of the divergent test sequence.
    Counterexample {
        #[arg(long)]
        nu1: PathBuf,
        #[arg(long)]
        nu2: PathBuf,
        #[arg(long)]
        nu3: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Re-runs the command recorded in a manifest.
    Replay {
        #[arg(long)]
        manifest: PathBuf,
        /// Output directory; defaults to the manifest's directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn read_spec(path: &Path) -> Result<serde_json::Value, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
    Ok(spec::parse_spec(&text, &path.display().to_string())?.0)
}

fn build(command: &str, inputs: &[(&str, &Path)], c: &Common) -> Result<RunConfig, CliError> {
    let mut map = BTreeMap::new();
    for (k, p) in inputs {
        map.insert((*k).to_string(), read_spec(p)?);
    }
    Ok(RunConfig {
        command: command.into(),
        inputs: map,
        p: c.p,
        grid: c.grid,
        tol: c.tol,
        seed: c.seed,
        degree: c.degree,
        nmax: c.nmax,
        endpoint: None,
        variant: None,
    })
}

fn execute(cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    let artifacts = commands::run(cfg)?;
    for (name, text) in &artifacts {
        let path = write_atomic(out, name, text)?;
        println!("{}", path.display());
    }
    let manifest = Manifest::new(cfg, &artifacts);
    write_atomic(out, MANIFEST_NAME, &to_json(&manifest))?;
    Ok(())
}

fn real_main(cli: Cli) -> Result<(), CliError> {
    let (cfg, out) = match cli.command {
        Command::Lambda { nu1, nu2, endpoint, variant, common } => {
            let mut cfg = build("lambda", &[("nu1", &nu1), ("nu2", &nu2)], &common)?;
            cfg.endpoint = Some(match endpoint {
                EndpointArg::A => "a".into(),
                EndpointArg::B => "b".into(),
            });
            cfg.variant = Some(match variant {
                VariantArg::Lambda => "lambda".into(),
                VariantArg::Prime => "prime".into(),
            });
            (cfg, common.out)
        }
        Command::Classify { mu1, mu0, common } => {
            let mut inputs: Vec<(&str, &Path)> = vec![("mu1", &mu1)];
            if let Some(m) = &mu0 {
                inputs.push(("mu0", m));
            }
            (build("classify", &inputs, &common)?, common.out)
        }
        Command::Decide { mu0, mu1, common } => (build("decide", &[("mu0", &mu0), ("mu1", &mu1)], &common)?, common.out),
        Command::Sop { mu0, mu1, common } => (build("sop", &[("mu0", &mu0), ("mu1", &mu1)], &common)?, common.out),
        Command::Mnorm { mu0, mu1, common } => (build("mnorm", &[("mu0", &mu0), ("mu1", &mu1)], &common)?, common.out),
        Command::Verify { mu0, mu1, common } => (build("verify", &[("mu0", &mu0), ("mu1", &mu1)], &common)?, common.out),
        Command::Counterexample { nu1, nu2, nu3, common } => {
            (build("counterexample", &[("nu1", &nu1), ("nu2", &nu2), ("nu3", &nu3)], &common)?, common.out)
        }
        Command::Replay { manifest, out } => {
            let text = std::fs::read_to_string(&manifest)
                .map_err(|e| CliError::Parse(format!("{}: {e}", manifest.display())))?;
            let m = Manifest::parse(&text)?;
            let dir = out.unwrap_or_else(|| manifest.parent().map(Path::to_path_buf).unwrap_or_else(|| ".".into()));
            (m.config, dir)
        }
    };
    execute(&cfg, &out)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match real_main(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("sobmuck: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
