//! Command-line configuration.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::LabError;

#[derive(Parser, Debug, Clone)]
#[command(name = "legendre-lab", version = env!("LAB_GIT_DESCRIBE"), about = "Periods, Betti maps and relation loci on the Legendre family")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum Command {
    /// Period lattice, reduced τ and j-invariant at one parameter.
    Periods(PeriodsArgs),
    /// Betti coordinates on a polar grid (grid.csv).
    Betti(BettiArgs),
    /// Sweep all relation pairs up to --amax/--bmax and report the double locus.
    Scan(Common),
    /// Counting-set sizes for one relation pair and witness height bound --T.
    Count(CountArgs),
    /// Torsion parameters of one point, cross-checked against division polynomials.
    Torsion(TorsionArgs),
    /// Torsion test of P at roots of unity λ0 ≠ 1.
    Stoll(StollArgs),
    /// Relation lattices of the specialised points at one parameter.
    Lattice(LatticeArgs),
    /// Height survey over torsion parameters and Néron–Tate heights at a rational parameter.
    Heights(HeightsArgs),
}

fn parse_disc(s: &str) -> Result<[f64; 3], String> {
    let v: Vec<f64> = s.split(',').map(|x| x.trim().parse::<f64>().map_err(|e| format!("`{x}`: {e}"))).collect::<Result<_, _>>()?;
    match v.as_slice() {
        [cx, cy, r] => Ok([*cx, *cy, *r]),
        [cx, r] => Ok([*cx, 0.0, *r]),
        _ => Err("expected cx,cy,r".into()),
    }
}

fn parse_point(s: &str) -> Result<[f64; 2], String> {
    let v: Vec<f64> = s.split(',').map(|x| x.trim().parse::<f64>().map_err(|e| format!("`{x}`: {e}"))).collect::<Result<_, _>>()?;
    match v.as_slice() {
        [re] => Ok([*re, 0.0]),
        [re, im] => Ok([*re, *im]),
        _ => Err("expected re[,im]".into()),
    }
}

/// Flags shared by the family-driven subcommands.
#[derive(Args, Debug, Clone, Serialize)]
pub struct Common {
    /// Family file (JSON).
    #[arg(long)]
    pub family: Option<PathBuf>,
    /// Search disc `cx,cy,r`.
    #[arg(long, value_parser = parse_disc, default_value = "4,0,1.5")]
    pub disc: [f64; 3],
    /// Exclusion radius around singular parameters.
    #[arg(long, default_value_t = 0.01)]
    pub margin: f64,
    /// Grid resolution (cells per side, or spokes for polar grids).
    #[arg(long, default_value_t = 64)]
    pub grid: usize,
    /// Working precision in bits.
    #[arg(long, default_value_t = 192)]
    pub prec: u32,
    #[arg(long, default_value_t = 4)]
    pub amax: i64,
    #[arg(long, default_value_t = 4)]
    pub bmax: i64,
    /// Witness height bound for counting.
    #[arg(long = "T", default_value_t = 100)]
    pub t_bound: i64,
    #[arg(long, default_value = "out")]
    #[serde(skip)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 1)]
    #[serde(skip)]
    pub workers: usize,
    /// Continue from checkpoints in the output directory.
    #[arg(long)]
    #[serde(skip)]
    pub resume: bool,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct PeriodsArgs {
    #[command(flatten)]
    pub common: Common,
    /// Parameter `re[,im]`.
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    pub lambda: [f64; 2],
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct BettiArgs {
    #[command(flatten)]
    pub common: Common,
    /// Rings of the polar grid (spokes come from --grid).
    #[arg(long, default_value_t = 16)]
    pub rings: usize,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct CountArgs {
    #[command(flatten)]
    pub common: Common,
    /// First relation, comma-separated integers.
    #[arg(long, allow_hyphen_values = true)]
    pub a: String,
    /// Second relation, comma-separated integers or Gaussian integers such as `1+2i`.
    #[arg(long, allow_hyphen_values = true)]
    pub b: String,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct TorsionArgs {
    #[command(flatten)]
    pub common: Common,
    /// Index of the point (1-based).
    #[arg(long, default_value_t = 1)]
    pub point: usize,
    /// Largest torsion order N.
    #[arg(long, default_value_t = 4)]
    pub nmax: u32,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct StollArgs {
    #[command(flatten)]
    pub common: Common,
    /// Largest root-of-unity order.
    #[arg(long, default_value_t = 16)]
    pub orders: u32,
    #[arg(long = "torsion-bound", default_value_t = 64)]
    pub torsion_bound: u32,
    /// Constant x-coordinate used when no family is given.
    #[arg(long, default_value = "2")]
    pub x: String,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct LatticeArgs {
    #[command(flatten)]
    pub common: Common,
    /// Parameter `re[,im]`; rational values are read exactly.
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: String,
    /// Coefficient bound for candidate relations.
    #[arg(long, default_value_t = 20)]
    pub bound: i64,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct HeightsArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 1)]
    pub point: usize,
    /// Largest torsion order in the survey.
    #[arg(long, default_value_t = 8)]
    pub nmax: u32,
    /// Rational parameters for Néron–Tate heights, comma-separated.
    #[arg(long, default_value = "")]
    pub lambdas: String,
    #[arg(long, default_value_t = 7)]
    pub kmax: usize,
}

impl Command {
    pub fn common(&self) -> &Common {
        match self {
            Command::Periods(a) => &a.common,
            Command::Betti(a) => &a.common,
            Command::Scan(c) => c,
            Command::Count(a) => &a.common,
            Command::Torsion(a) => &a.common,
            Command::Stoll(a) => &a.common,
            Command::Lattice(a) => &a.common,
            Command::Heights(a) => &a.common,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Command::Periods(_) => "periods",
            Command::Betti(_) => "betti",
            Command::Scan(_) => "scan",
            Command::Count(_) => "count",
            Command::Torsion(_) => "torsion",
            Command::Stoll(_) => "stoll",
            Command::Lattice(_) => "lattice",
            Command::Heights(_) => "heights",
        }
    }

    /// SHA-256 of the canonical JSON of everything that affects results, plus the family file bytes.
    pub fn config_hash(&self) -> Result<String, LabError> {
        let mut h = Sha256::new();
        h.update(serde_json::to_vec(self)?);
        if let Some(f) = &self.common().family {
            h.update(std::fs::read(f).unwrap_or_default());
        }
        Ok(h.finalize().iter().map(|b| format!("{b:02x}")).collect())
    }

    pub fn validate(&self) -> Result<(), LabError> {
        let c = self.common();
        let bad = |m: &str| Err(LabError::Config(m.into()));
        if c.prec < 64 {
            return bad("--prec must be at least 64");
        }
        if !(c.disc[2] > 0.0) || !(c.margin > 0.0) {
            return bad("disc radius and margin must be positive");
        }
        if c.amax < 1 || c.bmax < 1 || c.t_bound < 1 || c.grid < 2 {
            return bad("bounds must be at least 1 and --grid at least 2");
        }
        if c.workers < 1 {
            return bad("--workers must be at least 1");
        }
        Ok(())
    }
}

impl Common {
    pub fn center(&self) -> Complex64 {
        Complex64::new(self.disc[0], self.disc[1])
    }
}
