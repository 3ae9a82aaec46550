//! Report envelopes, CSV rows and checkpoint encodings.
//!
//! Numbers in reports and CSV files are decimal strings carrying as many significant digits as
//! the precision tag (`prec`, in bits) supports.

use std::fs;
use std::path::Path;

use legendre_core::betti::{CmInt, RelationVector};
use legendre_core::locus::{Level, LocusPoint, RelationOutcome};
use legendre_core::mp::{parse_rational, Complex, Float};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::Command;
use crate::error::LabError;

pub const TOOL: &str = "legendre-lab";
pub const VERSION: &str = env!("LAB_GIT_DESCRIBE");

pub fn fmt_float(x: &Float, prec: u32) -> String {
    x.to_sci_string(Float::decimal_digits(prec))
}

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.6e}")
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct ComplexDto {
    pub re: String,
    pub im: String,
}

impl ComplexDto {
    pub fn new(z: &Complex, prec: u32) -> Self {
        ComplexDto { re: fmt_float(&z.re, prec), im: fmt_float(&z.im, prec) }
    }
}

pub fn fmt_cm(b: &CmInt) -> String {
    match (b.re, b.im) {
        (re, 0) => re.to_string(),
        (0, im) => format!("{im}i"),
        (re, im) if im < 0 => format!("{re}{im}i"),
        (re, im) => format!("{re}+{im}i"),
    }
}

pub fn fmt_rel(rel: &RelationVector) -> (String, String) {
    let a = rel.a.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
    let b = rel.b.iter().map(fmt_cm).collect::<Vec<_>>().join(" ");
    (a, b)
}

pub fn level_name(l: Level) -> &'static str {
    match l {
        Level::Candidate => "candidate",
        Level::Refined => "refined",
        Level::Certified => "certified",
    }
}

fn level_from(s: &str) -> Option<Level> {
    match s {
        "candidate" => Some(Level::Candidate),
        "refined" => Some(Level::Refined),
        "certified" => Some(Level::Certified),
        _ => None,
    }
}

/// One row of `locus.csv`, also used inside JSON reports.
#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct LocusRow {
    pub kind: String,
    pub t0_re: String,
    pub t0_im: String,
    pub prec: u32,
    pub a: String,
    pub b: String,
    pub rho1: String,
    pub rho2: String,
    pub level: String,
    pub first_witness: String,
    pub second_witness: String,
    pub direct: bool,
}

fn fmt_witness(w: Option<[i64; 2]>) -> String {
    w.map(|w| format!("{} {}", w[0], w[1])).unwrap_or_default()
}

impl LocusRow {
    pub fn new(kind: &str, p: &LocusPoint, prec: u32) -> Self {
        let (a, b) = fmt_rel(&p.rel);
        LocusRow {
            kind: kind.into(),
            t0_re: fmt_float(&p.t0.re, prec),
            t0_im: fmt_float(&p.t0.im, prec),
            prec,
            a,
            b,
            rho1: fmt_f64(p.rho1),
            rho2: fmt_f64(p.rho2),
            level: level_name(p.level).into(),
            first_witness: fmt_witness(p.first_witness),
            second_witness: fmt_witness(p.second_witness),
            direct: p.direct,
        }
    }
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T], header: &[&str]) -> Result<(), LabError> {
    let mut w = csv::Writer::from_path(path)?;
    if rows.is_empty() {
        w.write_record(header)?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub const LOCUS_HEADER: &[&str] = &["kind", "t0_re", "t0_im", "prec", "a", "b", "rho1", "rho2", "level", "first_witness", "second_witness", "direct"];

#[derive(Serialize, Debug)]
pub struct Envelope<'a, T: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub config_hash: String,
    pub prec: u32,
    pub status: &'static str,
    pub config: &'a Command,
    pub result: T,
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), LabError> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    fs::write(path, s)?;
    Ok(())
}

/// Exact, lossless encoding of a [`LocusPoint`] for checkpoints.
#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct LocusCheckpoint {
    pub re: String,
    pub im: String,
    pub prec: u32,
    pub a: Vec<i64>,
    pub b: Vec<[i64; 2]>,
    pub first_witness: Option<[i64; 2]>,
    pub second_witness: Option<[i64; 2]>,
    pub rho1: u64,
    pub rho2: u64,
    pub level: String,
    pub direct: bool,
}

impl LocusCheckpoint {
    pub fn new(p: &LocusPoint) -> Self {
        LocusCheckpoint {
            re: p.t0.re.to_rational().to_string(),
            im: p.t0.im.to_rational().to_string(),
            prec: p.t0.prec(),
            a: p.rel.a.clone(),
            b: p.rel.b.iter().map(|c| [c.re, c.im]).collect(),
            first_witness: p.first_witness,
            second_witness: p.second_witness,
            rho1: p.rho1.to_bits(),
            rho2: p.rho2.to_bits(),
            level: level_name(p.level).into(),
            direct: p.direct,
        }
    }

    pub fn restore(&self) -> Option<LocusPoint> {
        let f = |s: &str| parse_rational(s).map(|r| Float::from_rational(&r, self.prec));
        Some(LocusPoint {
            t0: Complex::new(f(&self.re)?, f(&self.im)?),
            rel: RelationVector { a: self.a.clone(), b: self.b.iter().map(|c| CmInt { re: c[0], im: c[1] }).collect() },
            first_witness: self.first_witness,
            second_witness: self.second_witness,
            rho1: f64::from_bits(self.rho1),
            rho2: f64::from_bits(self.rho2),
            level: level_from(&self.level)?,
            direct: self.direct,
        })
    }
}

#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct OutcomeCheckpoint {
    pub a: Vec<i64>,
    pub single: Vec<[u64; 2]>,
    pub any_pair: Vec<[u64; 2]>,
    pub double: Vec<LocusCheckpoint>,
    pub quarantine: Vec<LocusCheckpoint>,
}

fn bits(z: &Complex64) -> [u64; 2] {
    [z.re.to_bits(), z.im.to_bits()]
}

fn unbits(b: &[u64; 2]) -> Complex64 {
    Complex64::new(f64::from_bits(b[0]), f64::from_bits(b[1]))
}

impl OutcomeCheckpoint {
    pub fn new(o: &RelationOutcome) -> Self {
        OutcomeCheckpoint {
            a: o.a.clone(),
            single: o.single.iter().map(bits).collect(),
            any_pair: o.any_pair.iter().map(bits).collect(),
            double: o.double.iter().map(LocusCheckpoint::new).collect(),
            quarantine: o.quarantine.iter().map(LocusCheckpoint::new).collect(),
        }
    }

    pub fn restore(&self) -> Option<RelationOutcome> {
        Some(RelationOutcome {
            a: self.a.clone(),
            single: self.single.iter().map(unbits).collect(),
            any_pair: self.any_pair.iter().map(unbits).collect(),
            double: self.double.iter().map(LocusCheckpoint::restore).collect::<Option<_>>()?,
            quarantine: self.quarantine.iter().map(LocusCheckpoint::restore).collect::<Option<_>>()?,
        })
    }
}

/// A completed chunk of a scan.
#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct ChunkCheckpoint {
    pub config_hash: String,
    pub chunk: usize,
    pub excluded_nodes: usize,
    pub outcomes: Vec<OutcomeCheckpoint>,
}
