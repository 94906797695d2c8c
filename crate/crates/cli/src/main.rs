//! `eulab`: batch driver for the steady-Euler-flow laboratory.
//!
//! Every subcommand reads a JSON experiment configuration, writes its
//! artifacts into the output directory with the configuration hash embedded,
//! and is deterministic given `(config, seed)` regardless of `--threads`.

mod commands;
mod config;

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;

#[derive(Debug)]
pub enum AppError {
    Validation { code: String, message: String },
    Numeric { code: String, message: String },
}

impl AppError {
    pub fn validation(code: &str, message: String) -> Self {
        AppError::Validation {
            code: code.into(),
            message,
        }
    }

    pub fn numeric(code: &str, message: String) -> Self {
        AppError::Numeric {
            code: code.into(),
            message,
        }
    }

    fn envelope(&self) -> serde_json::Value {
        let (code, message) = match self {
            AppError::Validation { code, message } | AppError::Numeric { code, message } => {
                (code, message)
            }
        };
        serde_json::json!({ "error": { "code": code, "message": message } })
    }

    fn exit_code(&self) -> i32 {
        match self {
            AppError::Validation { .. } => 2,
            AppError::Numeric { .. } => 3,
        }
    }
}

impl From<eulab_core::Error> for AppError {
    fn from(e: eulab_core::Error) -> Self {
        AppError::numeric("numeric/core", e.to_string())
    }
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Experiment configuration (JSON).
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory (EULAB_OUT overrides).
    #[arg(long, default_value = "./out")]
    pub out: PathBuf,
    /// Seed folded into every jittered grid and sampling choice.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (default: all hardware threads).
    #[arg(long)]
    pub threads: Option<usize>,
    /// Table format: csv or json (reports are always JSON).
    #[arg(long, default_value = "csv")]
    pub format: String,
}

impl Common {
    pub fn out_dir(&self) -> PathBuf {
        match std::env::var_os("EULAB_OUT") {
            Some(dir) if !dir.is_empty() => PathBuf::from(dir),
            _ => self.out.clone(),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "eulab", version, about = "steady Euler flows: twist maps, knotted KAM tori, integrability spectra")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Validate a profile and report curl, Bernoulli data and the
    /// nondegeneracy certificate.
    Flow(Common),
    /// Dump section return orbits (seed_id, iter, theta1_unreduced, rho,
    /// transit_time).
    Poincare(Common),
    /// Rotation-number profile over the transverse coordinate.
    Rotnum(Common),
    /// Locate the resonant circles W(c) = 2 pi p / q.
    Resonance(Common),
    /// Build the perturbed map; find and classify its periodic orbits.
    Perturb(Common),
    /// Suspend the perturbed map into a divergence-free field and verify the
    /// return-map recovery.
    Suspend(Common),
    /// Estimate the per-isotopy-class measure of invariant tori.
    Kappa(Common),
    /// Full pipeline: certificate, resonance, perturbation, suspension,
    /// before/after measure, and the non-mixing bound.
    Nonmixing(Common),
    /// Re-derive artifact hashes and run the acceptance suite.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Shrink the large acceptance grids.
        #[arg(long)]
        quick: bool,
    },
}

fn main() {
    let cli = Cli::parse();
    let common = match &cli.cmd {
        Cmd::Flow(c)
        | Cmd::Poincare(c)
        | Cmd::Rotnum(c)
        | Cmd::Resonance(c)
        | Cmd::Perturb(c)
        | Cmd::Suspend(c)
        | Cmd::Kappa(c)
        | Cmd::Nonmixing(c) => c.clone(),
        Cmd::Verify { common, .. } => common.clone(),
    };
    if let Some(n) = common.threads {
        // ignore failure on repeated initialization
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global();
    }
    let result = (|| -> Result<(), AppError> {
        let v = config::load(&common.config)?;
        match &cli.cmd {
            Cmd::Flow(_) => commands::flow(&v, &common),
            Cmd::Poincare(_) => commands::poincare(&v, &common),
            Cmd::Rotnum(_) => commands::rotnum(&v, &common),
            Cmd::Resonance(_) => commands::resonance(&v, &common),
            Cmd::Perturb(_) => commands::perturb_cmd(&v, &common),
            Cmd::Suspend(_) => commands::suspend_cmd(&v, &common),
            Cmd::Kappa(_) => commands::kappa_cmd(&v, &common),
            Cmd::Nonmixing(_) => commands::nonmixing(&v, &common),
            Cmd::Verify { quick, .. } => commands::verify(&v, &common, *quick),
        }
    })();
    match result {
        Ok(()) => {}
        Err(e) => {
            eprintln!("{}", e.envelope());
            std::process::exit(e.exit_code());
        }
    }
}
