//! JSON config schemas for the CLI subcommands. Matrices appear either
//! inline as row arrays or as file paths (resolved relative to the config
//! file's directory).

use anyhow::{bail, Context, Result};
use serde::Deserialize;
use specshatter_core::ensemble::EnsembleSpec;
use specshatter_core::io as sio;
use specshatter_core::linalg::RMat;
use specshatter_core::pseudospec::Region;
use specshatter_core::verify::{BoundConstants, BoundId};
use std::path::{Path, PathBuf};

#[derive(Deserialize, Clone)]
#[serde(untagged)]
pub enum MatrixSource {
    Path(String),
    Rows(Vec<Vec<f64>>),
}

impl MatrixSource {
    pub fn load(&self, base: &Path) -> Result<RMat> {
        match self {
            MatrixSource::Path(p) => {
                let path = if Path::new(p).is_absolute() {
                    PathBuf::from(p)
                } else {
                    base.join(p)
                };
                Ok(sio::load_real_matrix(&path)
                    .with_context(|| format!("loading matrix {}", path.display()))?)
            }
            MatrixSource::Rows(rows) => {
                let n = rows.len();
                if n == 0 {
                    bail!("inline matrix is empty");
                }
                let m = rows[0].len();
                if rows.iter().any(|r| r.len() != m) {
                    bail!("inline matrix rows have inconsistent lengths");
                }
                let flat: Vec<f64> = rows.iter().flatten().cloned().collect();
                Ok(RMat::from_row_slice(n, m, &flat))
            }
        }
    }
}

pub fn ensemble_from_value(v: &serde_json::Value, base: &Path) -> Result<EnsembleSpec> {
    Ok(sio::ensemble_spec_from_json(&v.to_string(), base)?)
}

#[derive(Deserialize)]
pub struct RegionDto {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl RegionDto {
    pub fn region(&self) -> Region {
        Region::new(self.x0, self.x1, self.y0, self.y1)
    }
}

#[derive(Deserialize)]
pub struct SvTailDto {
    pub ensemble: serde_json::Value,
    pub z: [f64; 2],
    pub k: usize,
    pub eps_grid: Vec<f64>,
    pub trials: usize,
    pub bound: BoundId,
    #[serde(default)]
    pub alpha: Option<f64>,
}

#[derive(Deserialize)]
pub struct GapDto {
    pub ensemble: serde_json::Value,
    pub s_grid: Vec<f64>,
    #[serde(default)]
    pub delta_grid: Option<Vec<f64>>,
    pub trials: usize,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub certify_below: Option<f64>,
}

#[derive(Deserialize)]
pub struct StripRegionDto {
    pub x0: f64,
    pub x1: f64,
    pub y_min: f64,
    pub y_max: f64,
}

#[derive(Deserialize)]
pub struct KappaDto {
    pub ensemble: serde_json::Value,
    pub omega_real: [f64; 2],
    pub omega_complex: StripRegionDto,
    pub trials: usize,
    #[serde(default)]
    pub eps1: Option<f64>,
    #[serde(default)]
    pub eps2: Option<f64>,
}

#[derive(Deserialize, Clone)]
#[serde(untagged)]
pub enum ZSpec {
    Named { identity: usize },
    Inline(MatrixSource),
}

#[derive(Deserialize)]
pub struct RectDto {
    pub n: usize,
    pub k: usize,
    pub j: usize,
    pub s_grid: Vec<f64>,
    pub trials: usize,
}

#[derive(Deserialize)]
pub struct SmallballDto {
    pub z: ZSpec,
    pub k: usize,
    #[serde(default)]
    pub law: Option<String>,
    pub trials: usize,
    #[serde(default)]
    pub bin_width: Option<f64>,
    #[serde(default)]
    pub ball_quantile: Option<f64>,
    #[serde(default)]
    pub u: Option<MatrixSource>,
    #[serde(default)]
    pub v: Option<MatrixSource>,
    #[serde(default)]
    pub w: Option<MatrixSource>,
    #[serde(default)]
    pub rect: Option<RectDto>,
}

#[derive(Deserialize)]
pub struct DominanceDto {
    pub a1: MatrixSource,
    pub a2: MatrixSource,
    pub t: f64,
    pub trials: usize,
    #[serde(default)]
    pub alpha: Option<f64>,
}

#[derive(Deserialize)]
pub struct MomentsDto {
    pub ensemble: serde_json::Value,
    pub p_list: Vec<usize>,
    pub trials: usize,
}

#[derive(Deserialize)]
pub struct ResolventDto {
    #[serde(default = "default_resolvent_n")]
    pub n_max: usize,
    #[serde(default = "default_resolvent_k")]
    pub k_max: usize,
    #[serde(default = "default_deltas")]
    pub deltas: Vec<f64>,
    pub trials: usize,
}

fn default_resolvent_n() -> usize {
    12
}
fn default_resolvent_k() -> usize {
    3
}
fn default_deltas() -> Vec<f64> {
    vec![0.1, 1.0, 10.0]
}

#[derive(Deserialize)]
pub struct RankInclusionDto {
    pub n: usize,
    pub r_list: Vec<usize>,
    pub pairs: usize,
    pub region: RegionDto,
    #[serde(default = "default_grid")]
    pub nx: usize,
    #[serde(default = "default_grid")]
    pub ny: usize,
}

fn default_grid() -> usize {
    20
}

#[derive(Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum PseudospecDto {
    Grid {
        matrix: MatrixSource,
        region: RegionDto,
        nx: usize,
        ny: usize,
        #[serde(default)]
        svg: bool,
    },
    Ratios {
        matrix: MatrixSource,
        /// defaults to the geometric schedule 1e-3 .. 1e-6
        #[serde(default = "default_eps_schedule")]
        eps_list: Vec<f64>,
        #[serde(default)]
        resolution: Option<usize>,
    },
    Length {
        matrix: MatrixSource,
        eps: f64,
        a: f64,
        b: f64,
        #[serde(default)]
        rel_tol: Option<f64>,
    },
    Area {
        matrix: MatrixSource,
        eps: f64,
        region: RegionDto,
        nx: usize,
        ny: usize,
        #[serde(default = "default_true")]
        subdivide: bool,
        #[serde(default)]
        tau_real: Option<f64>,
    },
}

fn default_true() -> bool {
    true
}

fn default_eps_schedule() -> Vec<f64> {
    vec![1e-3, 1e-4, 1e-5, 1e-6]
}

#[derive(Deserialize)]
pub struct AnalyzeDto {
    pub matrix: MatrixSource,
    #[serde(default)]
    pub tau_real: Option<f64>,
    #[serde(default)]
    pub submatrix_k: Option<usize>,
    #[serde(default)]
    pub gap_delta: Option<f64>,
}

pub fn load_constants(path: Option<&Path>) -> Result<BoundConstants> {
    match path {
        None => Ok(BoundConstants::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .with_context(|| format!("reading constants {}", p.display()))?;
            Ok(serde_json::from_str(&text).context("parsing constants JSON")?)
        }
    }
}
