//! Subcommand implementations.

use std::fs;
use std::path::{Path, PathBuf};

use legendre_core::betti::{theta_sample, CmInt, Disc, RelationVector};
use legendre_core::exec::Sequential;
use legendre_core::family::{FamilySpec, SecondFactor};
use legendre_core::heights::{torsion_survey, zimmer_gap};
use legendre_core::legendre::{eval_point, exact_x, j_invariant, AffinePoint, PointExpr, RationalFunction};
use legendre_core::locus::{aggregate, count_sets, relation_vectors, second_relations, stoll_scan, torsion_parameters, Scanner, SearchDisc};
use legendre_core::mp::{parse_rational, Complex, Float};
use legendre_core::periods::{period_basis, tau_reduce, GUARD_BITS};
use legendre_core::relations::{detect_cm_lattice, detect_elliptic_lattice, detect_mult_lattice, MultInput, RelationLattice};
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{BettiArgs, Command, Common, CountArgs, HeightsArgs, LatticeArgs, PeriodsArgs, StollArgs, TorsionArgs};
use crate::error::LabError;
use crate::exec::Rayon;
use crate::fixture::load_family;
use crate::report::*;

/// Relations per scan checkpoint.
pub const CHUNK: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Ok,
    /// Quarantined points or an oracle disagreement that needs a human look.
    Findings,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::Findings => 2,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::Findings => "findings",
        }
    }
}

struct Done {
    status: Status,
    result: Value,
}

fn family(c: &Common) -> Result<FamilySpec, LabError> {
    let path = c.family.as_ref().ok_or_else(|| LabError::Config("--family is required".into()))?;
    Ok(load_family(path)?.1)
}

fn search_disc(c: &Common) -> Result<SearchDisc, LabError> {
    Ok(SearchDisc::new(c.center(), c.disc[2], c.margin, c.grid)?)
}

fn executor(c: &Common) -> Result<Rayon, LabError> {
    Rayon::new(c.workers).map_err(|e| LabError::Config(e.to_string()))
}

/// Runs one subcommand, writing `report.json` and any CSV files into the output directory.
pub fn run(cmd: &Command) -> Result<Status, LabError> {
    cmd.validate()?;
    let out = cmd.common().out.clone();
    fs::create_dir_all(&out)?;
    let done = match cmd {
        Command::Periods(a) => periods(a)?,
        Command::Betti(a) => betti(a, &out)?,
        Command::Scan(c) => scan(cmd, c, &out)?,
        Command::Count(a) => count(a, &out)?,
        Command::Torsion(a) => torsion(a, &out)?,
        Command::Stoll(a) => stoll(a)?,
        Command::Lattice(a) => lattice(a)?,
        Command::Heights(a) => heights(a, &out)?,
    };
    let env = Envelope {
        tool: TOOL,
        version: VERSION,
        command: cmd.name(),
        config_hash: cmd.config_hash()?,
        prec: cmd.common().prec,
        status: done.status.name(),
        config: cmd,
        result: done.result,
    };
    write_json(&out.join("report.json"), &env)?;
    Ok(done.status)
}

/// Writes an error report next to where the normal one would go.
pub fn write_error(cmd: &Command, err: &LabError) {
    let out = &cmd.common().out;
    if fs::create_dir_all(out).is_err() {
        return;
    }
    let value = json!({
        "tool": TOOL,
        "version": VERSION,
        "command": cmd.name(),
        "status": "error",
        "error": { "code": err.code(), "message": err.to_string() },
    });
    let _ = write_json(&out.join("report.json"), &value);
}

fn periods(a: &PeriodsArgs) -> Result<Done, LabError> {
    let prec = a.common.prec;
    let l = Complex::new(Float::from_f64(a.lambda[0], prec + GUARD_BITS), Float::from_f64(a.lambda[1], prec + GUARD_BITS));
    let basis = period_basis(&l, prec)?;
    let (tau, m) = tau_reduce(&basis);
    let j = j_invariant(&l.with_prec(prec))?;
    Ok(Done {
        status: Status::Ok,
        result: json!({
            "lambda": ComplexDto::new(&l, prec),
            "f": ComplexDto::new(&basis.f, prec),
            "g": ComplexDto::new(&basis.g, prec),
            "tau": ComplexDto::new(&basis.tau(), prec),
            "tau_reduced": ComplexDto::new(&tau, prec),
            "reduction_matrix": m,
            "j": ComplexDto::new(&j, prec),
        }),
    })
}

#[derive(Serialize)]
struct GridRow {
    ring: usize,
    spoke: usize,
    t_re: String,
    t_im: String,
    prec: u32,
    first: String,
    second: String,
    imag: String,
    reconstruction: String,
    status: String,
}

const GRID_HEADER: &[&str] = &["ring", "spoke", "t_re", "t_im", "prec", "first", "second", "imag", "reconstruction", "status"];

fn betti(a: &BettiArgs, out: &Path) -> Result<Done, LabError> {
    let c = &a.common;
    let fam = family(c)?;
    let disc = Disc::new(c.center(), c.disc[2], c.margin, c.grid, a.rings)?;
    let exec = executor(c)?;
    let grid = theta_sample(&fam, &disc, c.prec, &exec)?;
    let prec = c.prec;
    let join = |x: &[Float], y: &[Float]| -> String {
        x.iter().zip(y).map(|(u, v)| format!("{} {}", fmt_float(u, prec), fmt_float(v, prec))).collect::<Vec<_>>().join(" ")
    };
    let mut rows = Vec::with_capacity(grid.nodes.len());
    let mut worst_imag = Float::zero(prec);
    let mut worst_rec = Float::zero(prec);
    for n in &grid.nodes {
        let (first, second, imag, rec, status) = match &n.value {
            Ok(v) => {
                worst_imag = worst_imag.max(v.imag.clone());
                worst_rec = worst_rec.max(v.reconstruction.clone());
                (join(&v.p, &v.q), join(&v.r, &v.s), fmt_f64(v.imag.to_f64()), fmt_f64(v.reconstruction.to_f64()), "ok".to_string())
            }
            Err(e) => (String::new(), String::new(), String::new(), String::new(), format!("excluded: {e}")),
        };
        rows.push(GridRow {
            ring: n.ring,
            spoke: n.spoke,
            t_re: fmt_f64(n.t.re),
            t_im: fmt_f64(n.t.im),
            prec,
            first,
            second,
            imag,
            reconstruction: rec,
            status,
        });
    }
    write_csv(&out.join("grid.csv"), &rows, GRID_HEADER)?;
    Ok(Done {
        status: Status::Ok,
        result: json!({
            "nodes": grid.nodes.len(),
            "excluded": grid.excluded(),
            "max_imag": fmt_f64(worst_imag.to_f64()),
            "max_reconstruction": fmt_f64(worst_rec.to_f64()),
        }),
    })
}

fn chunk_path(dir: &Path, k: usize) -> PathBuf {
    dir.join(format!("chunk-{k:05}.json"))
}

fn scan(cmd: &Command, c: &Common, out: &Path) -> Result<Done, LabError> {
    let fam = family(c)?;
    let disc = search_disc(c)?;
    let hash = cmd.config_hash()?;
    let avs = relation_vectors(fam.n(), c.amax);
    let bvs = second_relations(&fam, c.bmax);
    let chunks: Vec<(usize, &[Vec<i64>])> = avs.chunks(CHUNK).enumerate().collect();
    let dir = out.join("checkpoints");
    if !c.resume && dir.exists() {
        fs::remove_dir_all(&dir)?;
    }
    fs::create_dir_all(&dir)?;
    let load = |k: usize| -> Result<Option<ChunkCheckpoint>, LabError> {
        let p = chunk_path(&dir, k);
        if !c.resume || !p.exists() {
            return Ok(None);
        }
        let ck: ChunkCheckpoint = serde_json::from_slice(&fs::read(&p)?).map_err(|e| LabError::Resume(format!("{}: {e}", p.display())))?;
        if ck.config_hash != hash || ck.chunk != k {
            return Err(LabError::Resume(format!("{} was written by a different configuration", p.display())));
        }
        Ok(Some(ck))
    };
    // Each chunk owns a scanner, so its results do not depend on scheduling or on resumption.
    let work = |(k, rels): (usize, &[Vec<i64>])| -> Result<ChunkCheckpoint, LabError> {
        if let Some(ck) = load(k)? {
            return Ok(ck);
        }
        let mut sc = Scanner::new(&fam, disc, c.prec, &Sequential)?;
        let mut outcomes = Vec::with_capacity(rels.len());
        for a in rels {
            outcomes.push(OutcomeCheckpoint::new(&sc.relation(a, &bvs)?));
        }
        let ck = ChunkCheckpoint { config_hash: hash.clone(), chunk: k, excluded_nodes: sc.excluded(), outcomes };
        write_json(&chunk_path(&dir, k), &ck)?;
        Ok(ck)
    };
    let pool = executor(c)?;
    let done: Vec<Result<ChunkCheckpoint, LabError>> = legendre_core::exec::Executor::map(&pool, chunks, work);
    let mut outcomes = Vec::with_capacity(avs.len());
    let mut excluded = 0;
    for ck in done {
        let ck = ck?;
        excluded = ck.excluded_nodes;
        for o in &ck.outcomes {
            outcomes.push(o.restore().ok_or_else(|| LabError::Resume("undecodable checkpoint entry".into()))?);
        }
    }
    let rep = aggregate(&outcomes, excluded);
    let prec = c.prec;
    let mut rows: Vec<LocusRow> = rep.double.iter().map(|p| LocusRow::new("double", p, prec)).collect();
    rows.extend(rep.quarantine.iter().map(|p| LocusRow::new("quarantine", p, prec)));
    write_csv(&out.join("locus.csv"), &rows, LOCUS_HEADER)?;
    let status = if rep.quarantine.is_empty() { Status::Ok } else { Status::Findings };
    Ok(Done {
        status,
        result: json!({
            "relations_searched": rep.relations_searched,
            "second_relations": bvs.len(),
            "single_counts": rep.single_counts,
            "distinct_double": rep.distinct_double,
            "distinct_double_any": rep.distinct_double_any,
            "excluded_nodes": rep.excluded_nodes,
            "double": rep.double.iter().map(|p| LocusRow::new("double", p, prec)).collect::<Vec<_>>(),
            "quarantine": rep.quarantine.len(),
        }),
    })
}

fn parse_ints(s: &str) -> Result<Vec<i64>, LabError> {
    s.split(',').map(|x| x.trim().parse::<i64>().map_err(|e| LabError::Config(format!("`{x}`: {e}")))).collect()
}

/// `3`, `-2i`, `1+2i`, `4-i`.
pub fn parse_gaussian(s: &str) -> Option<CmInt> {
    let s = s.trim().replace(' ', "");
    let Some(body) = s.strip_suffix('i') else { return s.parse().ok().map(CmInt::int) };
    let split = body.char_indices().skip(1).filter(|(_, ch)| *ch == '+' || *ch == '-').map(|(k, _)| k).last();
    let (re, im) = match split {
        Some(k) => (&body[..k], &body[k..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => 1,
        "-" => -1,
        v => v.parse().ok()?,
    };
    Some(CmInt { re: re.parse().ok()?, im })
}

fn count(a: &CountArgs, out: &Path) -> Result<Done, LabError> {
    let c = &a.common;
    let fam = family(c)?;
    let disc = search_disc(c)?;
    let av = parse_ints(&a.a)?;
    let bv = a.b.split(',').map(|x| parse_gaussian(x).ok_or_else(|| LabError::Config(format!("bad Gaussian integer `{x}`")))).collect::<Result<Vec<_>, _>>()?;
    let rel = RelationVector::new(av, bv);
    let exec = executor(c)?;
    let rep = count_sets(&fam, &rel, c.t_bound, &disc, c.prec, &exec)?;
    let rows: Vec<LocusRow> = rep.points.iter().map(|p| LocusRow::new("counted", p, c.prec)).collect();
    write_csv(&out.join("locus.csv"), &rows, LOCUS_HEADER)?;
    let (ra, rb) = fmt_rel(&rep.rel);
    Ok(Done {
        status: Status::Ok,
        result: json!({
            "a": ra, "b": rb, "T": rep.t_bound,
            "single": rep.single, "double": rep.double,
            "excluded_nodes": rep.excluded_nodes, "witness_bound": rep.witness_bound,
        }),
    })
}

fn torsion(a: &TorsionArgs, out: &Path) -> Result<Done, LabError> {
    let c = &a.common;
    let fam = family(c)?;
    if a.point < 1 || a.point > fam.n() {
        return Err(LabError::Config(format!("--point must lie in 1..={}", fam.n())));
    }
    let disc = search_disc(c)?;
    let exec = executor(c)?;
    let mut rows = Vec::new();
    let mut orders = Vec::new();
    let mut status = Status::Ok;
    for n in 2..=a.nmax {
        match torsion_parameters(&fam, a.point - 1, n, &disc, c.prec, &exec)? {
            Ok(pts) => {
                rows.extend(pts.iter().map(|p| LocusRow::new(&format!("torsion-{n}"), p, c.prec)));
                orders.push(json!({ "N": n, "count": pts.len(), "agrees_with_oracle": true }));
            }
            Err(m) => {
                status = Status::Findings;
                let show = |v: &[Complex]| v.iter().map(|z| ComplexDto::new(z, c.prec)).collect::<Vec<_>>();
                orders.push(json!({ "N": n, "agrees_with_oracle": false, "betti": show(&m.betti), "oracle": show(&m.oracle) }));
            }
        }
    }
    write_csv(&out.join("locus.csv"), &rows, LOCUS_HEADER)?;
    Ok(Done { status, result: json!({ "point": a.point, "orders": orders }) })
}

fn stoll(a: &StollArgs) -> Result<Done, LabError> {
    let c = &a.common;
    let x = match &c.family {
        Some(_) => family(c)?.points[0].x().clone(),
        None => {
            let v = parse_rational(&a.x).ok_or_else(|| LabError::Config(format!("bad --x `{}`", a.x)))?;
            RationalFunction::constant(v)
        }
    };
    let rep = stoll_scan(&x, a.orders, a.torsion_bound, c.prec)?;
    let entries: Vec<Value> = rep
        .entries
        .iter()
        .map(|e| {
            json!({
                "order": e.order, "k": e.k,
                "lambda": ComplexDto::new(&e.lambda0, c.prec),
                "p": fmt_float(&e.p, c.prec), "q": fmt_float(&e.q, c.prec),
                "min_distance": fmt_f64(e.min_distance),
                "best_denominator": e.best_denominator,
                "detected": e.detected,
            })
        })
        .collect();
    let summary = if rep.detections == 0 { "no torsion detected".to_string() } else { format!("{} torsion detections", rep.detections) };
    Ok(Done {
        status: Status::Ok,
        result: json!({ "summary": summary, "detections": rep.detections, "min_distance": fmt_f64(rep.min_distance), "entries": entries }),
    })
}

fn parse_lambda(s: &str) -> Result<(BigRational, BigRational), LabError> {
    let mut parts = s.split(',');
    let re = parts.next().and_then(parse_rational).ok_or_else(|| LabError::Config(format!("bad --lambda `{s}`")))?;
    let im = match parts.next() {
        Some(p) => parse_rational(p).ok_or_else(|| LabError::Config(format!("bad --lambda `{s}`")))?,
        None => BigRational::zero(),
    };
    Ok((re, im))
}

fn specialize(fam: &FamilySpec, e: &PointExpr, l: &Complex, prec: u32) -> Result<AffinePoint, LabError> {
    let (re, im) = l.to_f64();
    let route = fam.route(e.anchor(), Complex64::new(re, im))?;
    let inner = &route[1..route.len() - 1];
    Ok(eval_point(e, l, inner, prec)?)
}

fn lattice_json(l: &RelationLattice) -> Value {
    json!({
        "rank": l.rank,
        "basis": l.basis,
        "cm": l.cm,
        "norms": l.norms,
        "residuals": l.residuals.iter().map(|r| json!({ "log": fmt_f64(r.log), "low": fmt_f64(r.low), "high": fmt_f64(r.high) })).collect::<Vec<_>>(),
    })
}

fn lattice(a: &LatticeArgs) -> Result<Done, LabError> {
    let c = &a.common;
    let fam = family(c)?;
    let prec = c.prec;
    let hi = 2 * prec + GUARD_BITS;
    let (re, im) = parse_lambda(&a.lambda)?;
    let l = Complex::new(Float::from_rational(&re, hi), Float::from_rational(&im, hi));
    let pts = fam.points.iter().map(|e| specialize(&fam, e, &l, hi)).collect::<Result<Vec<_>, _>>()?;
    let first = detect_elliptic_lattice(&pts, &period_basis(&l, hi)?, prec, a.bound)?;
    let second = match &fam.second {
        SecondFactor::Elliptic { points, .. } | SecondFactor::Constant { points, cm: false, .. } if !points.is_empty() => {
            let mu0 = fam.second_curve().and_then(|c| c.eval(&l)).ok_or(legendre_core::error::Error::SingularParameter)?;
            let qs = points.iter().map(|e| specialize(&fam, e, &l, hi)).collect::<Result<Vec<_>, _>>()?;
            Some(detect_elliptic_lattice(&qs, &period_basis(&mu0, hi)?, prec, a.bound)?)
        }
        SecondFactor::Constant { points, cm: true, .. } if !points.is_empty() => {
            let qs = points.iter().map(|e| specialize(&fam, e, &l, hi)).collect::<Result<Vec<_>, _>>()?;
            let m1 = Complex::from_i64(-1, hi);
            Some(detect_cm_lattice(&qs, &period_basis(&m1, hi)?, prec, a.bound)?)
        }
        SecondFactor::Units(us) => {
            let exact = im.is_zero();
            let inputs = us
                .iter()
                .map(|u| match (exact, u.eval_exact(&re)) {
                    (true, Some(v)) => Ok(MultInput::Exact(v)),
                    _ => u.eval(&l).map(MultInput::Numeric).ok_or(legendre_core::error::Error::SingularParameter),
                })
                .collect::<Result<Vec<_>, _>>()?;
            Some(detect_mult_lattice(&inputs, prec, a.bound)?)
        }
        _ => None,
    };
    Ok(Done {
        status: Status::Ok,
        result: json!({
            "lambda": ComplexDto::new(&l, prec),
            "first": lattice_json(&first),
            "second": second.as_ref().map(lattice_json),
        }),
    })
}

#[derive(Serialize)]
struct HeightRow {
    kind: String,
    order: String,
    lambda: String,
    poly: String,
    degree: String,
    h: String,
    neron_tate: String,
    neron_tate_error: String,
    h_lambda: String,
    implied: String,
    flags: String,
}

const HEIGHT_HEADER: &[&str] = &["kind", "order", "lambda", "poly", "degree", "h", "neron_tate", "neron_tate_error", "h_lambda", "implied", "flags"];

fn heights(a: &HeightsArgs, out: &Path) -> Result<Done, LabError> {
    let c = &a.common;
    let fam = family(c)?;
    if a.point < 1 || a.point > fam.n() {
        return Err(LabError::Config(format!("--point must lie in 1..={}", fam.n())));
    }
    let e = &fam.points[a.point - 1];
    let survey = torsion_survey(e, a.nmax, 20_000, c.prec)?;
    let mut rows: Vec<HeightRow> = survey
        .entries
        .iter()
        .map(|s| HeightRow {
            kind: "torsion".into(),
            order: s.order.to_string(),
            lambda: String::new(),
            poly: s.poly.0.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" "),
            degree: s.poly.degree().to_string(),
            h: fmt_f64(s.height),
            neron_tate: String::new(),
            neron_tate_error: String::new(),
            h_lambda: String::new(),
            implied: String::new(),
            flags: String::new(),
        })
        .collect();
    let lambdas: Vec<BigRational> = a
        .lambdas
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse_rational(s).ok_or_else(|| LabError::Config(format!("bad rational `{s}`"))))
        .collect::<Result<_, _>>()?;
    let zimmer: Vec<Result<HeightRow, LabError>> = lambdas
        .par_iter()
        .map(|l| {
            let x = exact_x(e, l).ok_or(legendre_core::error::Error::SingularParameter)?;
            let r = zimmer_gap(&x, l, a.kmax)?;
            Ok(HeightRow {
                kind: "neron_tate".into(),
                order: String::new(),
                lambda: l.to_string(),
                poly: format!("x = {x}"),
                degree: "1".into(),
                h: fmt_f64(r.h),
                neron_tate: fmt_f64(r.neron_tate.value),
                neron_tate_error: fmt_f64(r.neron_tate.error),
                h_lambda: fmt_f64(r.h_lambda),
                implied: fmt_f64(r.implied),
                flags: if r.neron_tate.torsion { "torsion".into() } else { String::new() },
            })
        })
        .collect();
    for z in zimmer {
        rows.push(z?);
    }
    write_csv(&out.join("heights.csv"), &rows, HEIGHT_HEADER)?;
    Ok(Done {
        status: Status::Ok,
        result: json!({
            "normalization": "neron_tate = lim 4^-k h(x(2^k P)), h the logarithmic Weil height",
            "survey": {
                "nmax": a.nmax,
                "factors": survey.entries.len(),
                "max": survey.max.map(fmt_f64),
                "min": survey.min.map(fmt_f64),
                "bin": survey.bin,
                "histogram": survey.histogram,
            },
            "neron_tate": rows.iter().filter(|r| r.kind == "neron_tate").count(),
        }),
    })
}
