//! File formats: whitespace matrix text ("n m" header, then rows; complex
//! entries as a+bi tokens), the JSON matrix variant {"n":..,"rows":[[..]]},
//! ensemble specs, and the grid CSV export.

use crate::ensemble::{EnsembleSpec, Family};
use crate::linalg::{C64, CMat, RMat};
use crate::pseudospec::PseudospectrumGrid;
use serde::{Deserialize, Serialize};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("shape error: {0}")]
    Shape(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Ensemble(#[from] crate::ensemble::EnsembleError),
}

fn parse_f64(tok: &str) -> Result<f64, IoError> {
    tok.parse::<f64>()
        .map_err(|_| IoError::Parse(format!("bad number: {tok:?}")))
}

/// Parses one complex token: "a+bi", "a-bi", "bi", "i", "-i" or a bare real.
pub fn parse_complex_token(tok: &str) -> Result<C64, IoError> {
    let t = tok.trim();
    if t.is_empty() {
        return Err(IoError::Parse("empty complex token".into()));
    }
    if !t.ends_with('i') && !t.ends_with('I') {
        return Ok(C64::new(parse_f64(t)?, 0.0));
    }
    let body = &t[..t.len() - 1];
    // split at the last +/- that is not a leading sign or exponent sign
    let bytes = body.as_bytes();
    let mut split = None;
    for pos in (1..bytes.len()).rev() {
        let c = bytes[pos] as char;
        if (c == '+' || c == '-') && !matches!(bytes[pos - 1] as char, 'e' | 'E') {
            split = Some(pos);
            break;
        }
    }
    match split {
        Some(pos) => {
            let re = parse_f64(&body[..pos])?;
            let im_str = &body[pos..];
            let im = match im_str {
                "+" => 1.0,
                "-" => -1.0,
                s => parse_f64(s)?,
            };
            Ok(C64::new(re, im))
        }
        None => {
            let im = match body {
                "" => 1.0,
                "-" => -1.0,
                "+" => 1.0,
                s => parse_f64(s)?,
            };
            Ok(C64::new(0.0, im))
        }
    }
}

pub fn format_complex(z: C64) -> String {
    format!("{}{:+}i", z.re, z.im)
}

fn parse_header(line: &str) -> Result<(usize, usize), IoError> {
    let mut it = line.split_whitespace();
    let n = it
        .next()
        .ok_or_else(|| IoError::Parse("missing row count".into()))?
        .parse::<usize>()
        .map_err(|_| IoError::Parse("bad row count".into()))?;
    let m = it
        .next()
        .ok_or_else(|| IoError::Parse("missing column count".into()))?
        .parse::<usize>()
        .map_err(|_| IoError::Parse("bad column count".into()))?;
    if it.next().is_some() {
        return Err(IoError::Parse("header must be exactly \"n m\"".into()));
    }
    Ok((n, m))
}

#[derive(Serialize, Deserialize)]
struct JsonMatrix {
    n: usize,
    #[serde(default)]
    m: Option<usize>,
    rows: Vec<Vec<f64>>,
}

/// Real matrix from text or JSON (sniffed by a leading '{').
pub fn parse_real_matrix(input: &str) -> Result<RMat, IoError> {
    let trimmed = input.trim_start();
    if trimmed.starts_with('{') {
        let jm: JsonMatrix = serde_json::from_str(trimmed)?;
        let m = jm.m.unwrap_or(jm.n);
        if jm.rows.len() != jm.n || jm.rows.iter().any(|r| r.len() != m) {
            return Err(IoError::Shape(format!(
                "JSON matrix claims {}x{m} but rows disagree",
                jm.n
            )));
        }
        let flat: Vec<f64> = jm.rows.into_iter().flatten().collect();
        return Ok(RMat::from_row_slice(jm.n, m, &flat));
    }
    let mut lines = input.lines().filter(|l| !l.trim().is_empty());
    let (n, m) = parse_header(
        lines
            .next()
            .ok_or_else(|| IoError::Parse("empty matrix file".into()))?,
    )?;
    let mut flat = Vec::with_capacity(n * m);
    for i in 0..n {
        let line = lines
            .next()
            .ok_or_else(|| IoError::Parse(format!("missing row {}", i + 1)))?;
        let row: Result<Vec<f64>, _> = line.split_whitespace().map(parse_f64).collect();
        let row = row?;
        if row.len() != m {
            return Err(IoError::Shape(format!(
                "row {} has {} entries, expected {m}",
                i + 1,
                row.len()
            )));
        }
        flat.extend(row);
    }
    Ok(RMat::from_row_slice(n, m, &flat))
}

/// Complex matrix from text with a+bi tokens (or JSON rows of [re, im] pairs).
pub fn parse_complex_matrix(input: &str) -> Result<CMat, IoError> {
    let trimmed = input.trim_start();
    if trimmed.starts_with('{') {
        #[derive(Deserialize)]
        struct JsonComplexMatrix {
            n: usize,
            #[serde(default)]
            m: Option<usize>,
            rows: Vec<Vec<[f64; 2]>>,
        }
        let jm: JsonComplexMatrix = serde_json::from_str(trimmed)?;
        let m = jm.m.unwrap_or(jm.n);
        if jm.rows.len() != jm.n || jm.rows.iter().any(|r| r.len() != m) {
            return Err(IoError::Shape("JSON complex matrix shape mismatch".into()));
        }
        let flat: Vec<C64> = jm
            .rows
            .into_iter()
            .flatten()
            .map(|p| C64::new(p[0], p[1]))
            .collect();
        return Ok(CMat::from_row_slice(jm.n, m, &flat));
    }
    let mut lines = input.lines().filter(|l| !l.trim().is_empty());
    let (n, m) = parse_header(
        lines
            .next()
            .ok_or_else(|| IoError::Parse("empty matrix file".into()))?,
    )?;
    let mut flat = Vec::with_capacity(n * m);
    for i in 0..n {
        let line = lines
            .next()
            .ok_or_else(|| IoError::Parse(format!("missing row {}", i + 1)))?;
        let row: Result<Vec<C64>, _> = line.split_whitespace().map(parse_complex_token).collect();
        let row = row?;
        if row.len() != m {
            return Err(IoError::Shape(format!(
                "row {} has {} entries, expected {m}",
                i + 1,
                row.len()
            )));
        }
        flat.extend(row);
    }
    Ok(CMat::from_row_slice(n, m, &flat))
}

pub fn format_real_matrix(m: &RMat) -> String {
    let mut out = format!("{} {}\n", m.nrows(), m.ncols());
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| format!("{}", m[(i, j)])).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

pub fn format_complex_matrix(m: &CMat) -> String {
    let mut out = format!("{} {}\n", m.nrows(), m.ncols());
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| format_complex(m[(i, j)])).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

pub fn load_real_matrix(path: &Path) -> Result<RMat, IoError> {
    parse_real_matrix(&std::fs::read_to_string(path)?)
}

pub fn load_complex_matrix(path: &Path) -> Result<CMat, IoError> {
    parse_complex_matrix(&std::fs::read_to_string(path)?)
}

// --- ensemble spec ---------------------------------------------------------

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ShiftDto {
    Path(String),
    Rows(Vec<Vec<f64>>),
}

#[derive(Serialize, Deserialize)]
struct EnsembleSpecDto {
    n: usize,
    family: String,
    #[serde(rename = "K", default, skip_serializing_if = "Option::is_none")]
    k: Option<f64>,
    gamma: f64,
    #[serde(rename = "A", default, skip_serializing_if = "Option::is_none")]
    a: Option<ShiftDto>,
}

/// {"n":.., "family":"real_ginibre", "K":.., "gamma":.., "A": path-or-inline}
pub fn ensemble_spec_from_json(json: &str, base_dir: &Path) -> Result<EnsembleSpec, IoError> {
    let dto: EnsembleSpecDto = serde_json::from_str(json)?;
    let family = Family::parse(&dto.family)?;
    let shift = match dto.a {
        None => None,
        Some(ShiftDto::Path(p)) => {
            let path = if Path::new(&p).is_absolute() {
                Path::new(&p).to_path_buf()
            } else {
                base_dir.join(&p)
            };
            Some(load_real_matrix(&path)?)
        }
        Some(ShiftDto::Rows(rows)) => {
            let n = rows.len();
            if rows.iter().any(|r| r.len() != n) {
                return Err(IoError::Shape("inline A must be square".into()));
            }
            let flat: Vec<f64> = rows.into_iter().flatten().collect();
            Some(RMat::from_row_slice(n, n, &flat))
        }
    };
    let spec = EnsembleSpec {
        n: dto.n,
        family,
        density_bound: dto.k,
        gamma: dto.gamma,
        shift,
    };
    spec.validate()?;
    Ok(spec)
}

pub fn ensemble_spec_to_json(spec: &EnsembleSpec) -> serde_json::Value {
    let a = spec.shift.as_ref().map(|m| {
        ShiftDto::Rows(
            (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
                .collect(),
        )
    });
    serde_json::to_value(EnsembleSpecDto {
        n: spec.n,
        family: serde_json::to_value(spec.family)
            .expect("family serializes")
            .as_str()
            .expect("family is a string")
            .to_string(),
        k: Some(spec.density_bound()),
        gamma: spec.gamma,
        a,
    })
    .expect("spec serializes")
}

/// Grid export: CSV with columns (re, im, sigma_min), row-major in the x
/// index with y varying fastest (the grid's storage order).
pub fn grid_to_csv(grid: &PseudospectrumGrid) -> String {
    let mut out = String::from("re,im,sigma_min\n");
    for i in 0..grid.nx {
        for j in 0..grid.ny {
            let (x, y) = grid.point(i, j);
            out.push_str(&format!("{},{},{}\n", x, y, grid.value(i, j)));
        }
    }
    out
}
