//! The SFI text format.
//!
//! ```text
//! sfi 1
//! mode matrix          # or coords2d
//! n 3
//! 0 2 2
//! 2 0 2
//! 2 2 0
//! demands 1
//! 0 1
//! ```
//!
//! Rationals accept `p/q` or decimal literals; `#` starts a comment. In
//! `coords2d` mode each point line is `x y`; distances are Euclidean, exact
//! whenever the squared distance is a perfect rational square and otherwise
//! rounded to denominator 10^6 and repaired by shortest-path closure.

use std::path::Path;

use crate::rational::Rational;

use super::{Instance, InstanceError};

#[derive(Debug, thiserror::Error)]
pub enum SfiError {
    #[error("line {0}: {1}")]
    Parse(usize, String),
    #[error("validation failed: {0}")]
    Invalid(#[from] InstanceError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub fn load(path: &Path) -> Result<Instance, SfiError> {
    let text = std::fs::read_to_string(path)?;
    load_str(&text)
}

/// Parses and validates.
pub fn load_str(text: &str) -> Result<Instance, SfiError> {
    let inst = parse_sfi(text)?;
    inst.validate()?;
    Ok(inst)
}

/// Parses without validating.
pub fn parse_sfi(text: &str) -> Result<Instance, SfiError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let mut next = || lines.next().ok_or_else(|| SfiError::Parse(0, "unexpected end of file".into()));

    let (ln, header) = next()?;
    if header != "sfi 1" {
        return Err(SfiError::Parse(ln, format!("expected `sfi 1`, got `{header}`")));
    }
    let (ln, mode_line) = next()?;
    let mode = mode_line
        .strip_prefix("mode ")
        .ok_or_else(|| SfiError::Parse(ln, "expected `mode matrix|coords2d`".into()))?
        .trim();
    if mode != "matrix" && mode != "coords2d" {
        return Err(SfiError::Parse(ln, format!("unknown mode `{mode}`")));
    }
    let (ln, n_line) = next()?;
    let n: usize = n_line
        .strip_prefix("n ")
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| SfiError::Parse(ln, "expected `n <count>`".into()))?;

    let dist = if mode == "matrix" {
        let mut rows = Vec::with_capacity(n);
        for _ in 0..n {
            let (ln, row) = next()?;
            let parsed: Result<Vec<Rational>, _> = row
                .split_whitespace()
                .map(|tok| tok.parse::<Rational>())
                .collect();
            let parsed = parsed.map_err(|e| SfiError::Parse(ln, e.to_string()))?;
            if parsed.len() != n {
                return Err(SfiError::Parse(ln, format!("expected {n} entries, got {}", parsed.len())));
            }
            rows.push(parsed);
        }
        rows
    } else {
        let mut pts = Vec::with_capacity(n);
        for _ in 0..n {
            let (ln, row) = next()?;
            let toks: Vec<&str> = row.split_whitespace().collect();
            if toks.len() != 2 {
                return Err(SfiError::Parse(ln, "expected `x y`".into()));
            }
            let x: Rational = toks[0].parse().map_err(|e: crate::rational::ParseRationalError| {
                SfiError::Parse(ln, e.to_string())
            })?;
            let y: Rational = toks[1].parse().map_err(|e: crate::rational::ParseRationalError| {
                SfiError::Parse(ln, e.to_string())
            })?;
            pts.push((x, y));
        }
        euclidean_matrix(&pts)
    };

    let (ln, d_line) = next()?;
    let k: usize = d_line
        .strip_prefix("demands ")
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| SfiError::Parse(ln, "expected `demands <k>`".into()))?;
    let mut demands = Vec::with_capacity(k);
    for _ in 0..k {
        let (ln, row) = next()?;
        let toks: Vec<&str> = row.split_whitespace().collect();
        if toks.len() != 2 {
            return Err(SfiError::Parse(ln, "expected `u v`".into()));
        }
        let u: usize = toks[0]
            .parse()
            .map_err(|_| SfiError::Parse(ln, "bad vertex index".into()))?;
        let v: usize = toks[1]
            .parse()
            .map_err(|_| SfiError::Parse(ln, "bad vertex index".into()))?;
        demands.push((u, v));
    }
    Ok(Instance::from_parts(dist, demands))
}

fn euclidean_matrix(pts: &[(Rational, Rational)]) -> Vec<Vec<Rational>> {
    let n = pts.len();
    let mut dist = vec![vec![Rational::ZERO; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let dx = pts[i].0 - pts[j].0;
            let dy = pts[i].1 - pts[j].1;
            let sq = dx * dx + dy * dy;
            let d = rational_sqrt(sq).unwrap_or_else(|| {
                // Round to denominator 10^6; the closure below repairs any
                // resulting triangle slack.
                let approx = sq.to_f64().sqrt();
                Rational::new((approx * 1e6).round() as i128, 1_000_000)
            });
            dist[i][j] = d;
            dist[j][i] = d;
        }
    }
    let mut inst = Instance::from_parts(dist, Vec::new());
    inst.close_metric();
    (0..n).map(|i| (0..n).map(|j| inst.dist(i, j)).collect()).collect()
}

/// Exact square root of a nonnegative rational, when one exists.
fn rational_sqrt(x: Rational) -> Option<Rational> {
    if x.is_negative() {
        return None;
    }
    let isqrt = |v: i128| -> Option<i128> {
        let r = (v as f64).sqrt().round() as i128;
        for cand in [r - 1, r, r + 1] {
            if cand >= 0 && cand * cand == v {
                return Some(cand);
            }
        }
        None
    };
    Some(Rational::new(isqrt(x.numer())?, isqrt(x.denom())?))
}

/// Canonical form: matrix mode.
pub fn to_sfi_string(inst: &Instance) -> String {
    let n = inst.num_vertices();
    let mut out = String::from("sfi 1\nmode matrix\n");
    out.push_str(&format!("n {n}\n"));
    for i in 0..n {
        let row: Vec<String> = (0..n).map(|j| inst.dist(i, j).to_string()).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out.push_str(&format!("demands {}\n", inst.num_pairs()));
    for &(u, v) in inst.demands() {
        out.push_str(&format!("{u} {v}\n"));
    }
    out
}

pub fn save(inst: &Instance, path: &Path) -> Result<(), SfiError> {
    std::fs::write(path, to_sfi_string(inst))?;
    Ok(())
}
