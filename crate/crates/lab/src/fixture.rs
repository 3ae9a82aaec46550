//! JSON family files.
//!
//! Rational functions are coefficient lists, lowest degree first, each entry an integer,
//! `p/q` or a decimal string. Points on the second factor live on `E_μ` (or `E_μ0`)
//! automatically; points on the first factor live on `E_λ`.

use std::path::Path;

use legendre_core::family::{FamilySpec, SecondFactor};
use legendre_core::legendre::{PointExpr, RationalFunction};
use legendre_core::mp::parse_rational;
use legendre_core::poly::QPoly;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::LabError;

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RationalFunctionDto {
    pub num: Vec<String>,
    #[serde(default = "one")]
    pub den: Vec<String>,
}

fn one() -> Vec<String> {
    vec!["1".into()]
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PointDto {
    pub x: RationalFunctionDto,
    /// Parameter value where `y_anchor` fixes the square-root branch.
    pub anchor: [f64; 2],
    pub y_anchor: [f64; 2],
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum SecondDto {
    Elliptic { mu: RationalFunctionDto, points: Vec<PointDto> },
    Constant { mu0: String, points: Vec<PointDto>, #[serde(default)] cm: bool },
    Units { units: Vec<RationalFunctionDto> },
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FamilyFile {
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub points: Vec<PointDto>,
    pub second: SecondDto,
}

fn parse_err(msg: impl Into<String>) -> LabError {
    LabError::FamilyParse(msg.into())
}

fn rf(dto: &RationalFunctionDto) -> Result<RationalFunction, LabError> {
    let poly = |cs: &[String]| -> Result<QPoly, LabError> {
        let v = cs.iter().map(|c| parse_rational(c).ok_or_else(|| parse_err(format!("bad coefficient `{c}`")))).collect::<Result<Vec<_>, _>>()?;
        Ok(QPoly::new(v))
    };
    RationalFunction::new(poly(&dto.num)?, poly(&dto.den)?).map_err(|e| parse_err(e.to_string()))
}

fn c64(v: [f64; 2]) -> Complex64 {
    Complex64::new(v[0], v[1])
}

fn point(dto: &PointDto, curve: Option<&RationalFunction>) -> Result<PointExpr, LabError> {
    let x = rf(&dto.x)?;
    let p = match curve {
        None => PointExpr::new(x, c64(dto.anchor), c64(dto.y_anchor)),
        Some(c) => PointExpr::on_curve(x, c.clone(), c64(dto.anchor), c64(dto.y_anchor)),
    };
    p.map_err(|e| parse_err(e.to_string()))
}

impl FamilyFile {
    pub fn load(path: &Path) -> Result<FamilyFile, LabError> {
        let text = std::fs::read_to_string(path).map_err(|e| parse_err(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| parse_err(format!("{}: {e}", path.display())))
    }

    pub fn build(&self) -> Result<FamilySpec, LabError> {
        let points = self.points.iter().map(|p| point(p, None)).collect::<Result<Vec<_>, _>>()?;
        let second = match &self.second {
            SecondDto::Elliptic { mu, points: qs } => {
                let mu = rf(mu)?;
                let qs = qs.iter().map(|q| point(q, Some(&mu))).collect::<Result<Vec<_>, _>>()?;
                SecondFactor::Elliptic { mu, points: qs }
            }
            SecondDto::Constant { mu0, points: qs, cm } => {
                let mu0 = parse_rational(mu0).ok_or_else(|| parse_err(format!("bad mu0 `{mu0}`")))?;
                let c = RationalFunction::constant(mu0.clone());
                let qs = qs.iter().map(|q| point(q, Some(&c))).collect::<Result<Vec<_>, _>>()?;
                SecondFactor::Constant { mu0, points: qs, cm: *cm }
            }
            SecondDto::Units { units } => SecondFactor::Units(units.iter().map(rf).collect::<Result<Vec<_>, _>>()?),
        };
        FamilySpec::new(points, second).map_err(|e| parse_err(e.to_string()))
    }
}

/// Loads and validates a family file.
pub fn load_family(path: &Path) -> Result<(FamilyFile, FamilySpec), LabError> {
    let file = FamilyFile::load(path)?;
    let spec = file.build()?;
    Ok((file, spec))
}
