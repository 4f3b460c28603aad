//! Random matrix ensembles with independent, absolutely continuous entries:
//! the entry law of the sqrt(n)-scaled-up matrix has density bounded by K, and
//! sampled matrices are A + gamma * M. Sampling is a pure function of
//! (spec, seed, index).

use crate::linalg::{op_norm_real, pairwise_sum, C64, CMat, RMat};
use crate::rng::stream_rng;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal, Triangular};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EnsembleError {
    #[error("unknown ensemble family: {0}")]
    UnknownFamily(String),
    #[error("family {family:?} produces {produced} matrices, expected {expected}")]
    WrongMatrixKind {
        family: Family,
        produced: &'static str,
        expected: &'static str,
    },
    #[error("need at least {min} trials, got {got}")]
    InsufficientTrials { min: usize, got: usize },
    #[error("moment order must be >= 1, got {0}")]
    BadMomentOrder(usize),
    #[error("shift matrix must be {n}x{n}, got {rows}x{cols}")]
    ShiftShape { n: usize, rows: usize, cols: usize },
    #[error("dimension must be >= 1")]
    ZeroDimension,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    RealGinibre,
    ComplexGinibre,
    Uniform,
    Laplace,
    Triangular,
    ShiftedUniform,
}

impl Family {
    pub fn parse(s: &str) -> Result<Self, EnsembleError> {
        match s {
            "real_ginibre" => Ok(Family::RealGinibre),
            "complex_ginibre" => Ok(Family::ComplexGinibre),
            "uniform" => Ok(Family::Uniform),
            "laplace" => Ok(Family::Laplace),
            "triangular" => Ok(Family::Triangular),
            "shifted_uniform" => Ok(Family::ShiftedUniform),
            other => Err(EnsembleError::UnknownFamily(other.to_string())),
        }
    }

    /// Density bound K of the unscaled (unit-variance) entry law.
    pub fn default_density_bound(self) -> f64 {
        match self {
            // N(0,1): peak 1/sqrt(2 pi)
            Family::RealGinibre => 1.0 / (2.0 * std::f64::consts::PI).sqrt(),
            // per-component N(0, 1/2): peak 1/sqrt(pi)
            Family::ComplexGinibre => 1.0 / std::f64::consts::PI.sqrt(),
            // U[-sqrt3, sqrt3]
            Family::Uniform => 1.0 / (2.0 * 3f64.sqrt()),
            // Laplace(0, 1/sqrt2): peak 1/(2b) = 1/sqrt2
            Family::Laplace => 1.0 / 2f64.sqrt(),
            // symmetric triangular on [-sqrt6, sqrt6]: peak 1/sqrt6
            Family::Triangular => 1.0 / 6f64.sqrt(),
            // U[1 - sqrt3, 1 + sqrt3]: noncentered, same K as uniform
            Family::ShiftedUniform => 1.0 / (2.0 * 3f64.sqrt()),
        }
    }

    pub fn is_complex(self) -> bool {
        matches!(self, Family::ComplexGinibre)
    }
}

/// A fully specified random matrix law: samples are A + gamma * M with M
/// having i.i.d. entries of variance 1/n from `family`.
#[derive(Debug, Clone)]
pub struct EnsembleSpec {
    pub n: usize,
    pub family: Family,
    /// Density bound of the unscaled entry law; None uses the family default.
    pub density_bound: Option<f64>,
    pub gamma: f64,
    /// Deterministic shift A (None means zero).
    pub shift: Option<RMat>,
}

impl EnsembleSpec {
    pub fn centered(n: usize, family: Family, gamma: f64) -> Self {
        EnsembleSpec {
            n,
            family,
            density_bound: None,
            gamma,
            shift: None,
        }
    }

    pub fn density_bound(&self) -> f64 {
        self.density_bound
            .unwrap_or_else(|| self.family.default_density_bound())
    }

    pub fn shift_norm(&self) -> f64 {
        self.shift.as_ref().map_or(0.0, op_norm_real)
    }

    pub fn validate(&self) -> Result<(), EnsembleError> {
        if self.n == 0 {
            return Err(EnsembleError::ZeroDimension);
        }
        if let Some(a) = &self.shift {
            if a.nrows() != self.n || a.ncols() != self.n {
                return Err(EnsembleError::ShiftShape {
                    n: self.n,
                    rows: a.nrows(),
                    cols: a.ncols(),
                });
            }
        }
        Ok(())
    }
}

/// One unscaled (unit-variance) draw from the family's entry law.
pub(crate) fn draw_unscaled<R: Rng>(family: Family, rng: &mut R) -> f64 {
    match family {
        Family::RealGinibre => rng.sample::<f64, _>(StandardNormal),
        Family::ComplexGinibre => unreachable!("complex entries drawn pairwise"),
        Family::Uniform => {
            let u: f64 = rng.random();
            (2.0 * u - 1.0) * 3f64.sqrt()
        }
        Family::Laplace => {
            // inverse CDF; b = 1/sqrt2 gives unit variance
            let u: f64 = rng.random();
            let b = 1.0 / 2f64.sqrt();
            let centered = u - 0.5;
            -b * centered.signum() * (1.0 - 2.0 * centered.abs()).max(f64::MIN_POSITIVE).ln()
        }
        Family::Triangular => {
            let a = 6f64.sqrt();
            let tri = Triangular::new(-a, a, 0.0).expect("valid triangular");
            tri.sample(rng)
        }
        Family::ShiftedUniform => {
            let u: f64 = rng.random();
            1.0 + (2.0 * u - 1.0) * 3f64.sqrt()
        }
    }
}

/// Sample A + gamma * M for a real family. Entries are filled in row-major
/// order from the (seed, index) stream, so the result is bitwise reproducible.
pub fn sample_real(spec: &EnsembleSpec, seed: u64, index: u64) -> Result<RMat, EnsembleError> {
    spec.validate()?;
    if spec.family.is_complex() {
        return Err(EnsembleError::WrongMatrixKind {
            family: spec.family,
            produced: "complex",
            expected: "real",
        });
    }
    let n = spec.n;
    let mut out = match &spec.shift {
        Some(a) => a.clone(),
        None => RMat::zeros(n, n),
    };
    if spec.gamma == 0.0 {
        return Ok(out);
    }
    let mut rng = stream_rng(seed, index);
    let scale = spec.gamma / (n as f64).sqrt();
    for i in 0..n {
        for j in 0..n {
            out[(i, j)] += scale * draw_unscaled(spec.family, &mut rng);
        }
    }
    Ok(out)
}

/// Sample gamma * M for the complex Ginibre family (plus real shift A).
pub fn sample_complex(spec: &EnsembleSpec, seed: u64, index: u64) -> Result<CMat, EnsembleError> {
    spec.validate()?;
    if !spec.family.is_complex() {
        return Err(EnsembleError::WrongMatrixKind {
            family: spec.family,
            produced: "real",
            expected: "complex",
        });
    }
    let n = spec.n;
    let mut out = match &spec.shift {
        Some(a) => a.map(|x| C64::new(x, 0.0)),
        None => CMat::zeros(n, n),
    };
    if spec.gamma == 0.0 {
        return Ok(out);
    }
    let mut rng = stream_rng(seed, index);
    // E|entry|^2 = 1/n
    let scale = spec.gamma / (2.0 * n as f64).sqrt();
    for i in 0..n {
        for j in 0..n {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            out[(i, j)] += C64::new(scale * re, scale * im);
        }
    }
    Ok(out)
}

/// Monte Carlo estimate of B_{M,p} = E[||M||^p]^{1/p} with jackknife standard
/// error. Requires a centered spec (A = 0, gamma = 1).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub p: usize,
    pub mean_estimate: f64,
    pub stderr: f64,
    pub trials: usize,
}

pub fn estimate_norm_moment(
    spec: &EnsembleSpec,
    p: usize,
    trials: usize,
    seed: u64,
    threads: usize,
) -> Result<MomentEstimate, EnsembleError> {
    if p < 1 {
        return Err(EnsembleError::BadMomentOrder(p));
    }
    if trials < 100 {
        return Err(EnsembleError::InsufficientTrials {
            min: 100,
            got: trials,
        });
    }
    spec.validate()?;
    let powers: Vec<f64> = if spec.family.is_complex() {
        crate::rng::run_trials(trials, threads, |i| {
            let m = sample_complex(spec, seed, i).expect("validated spec");
            let sv = crate::linalg::singular_values_complex(&m);
            sv[0].powi(p as i32)
        })
    } else {
        crate::rng::run_trials(trials, threads, |i| {
            let m = sample_real(spec, seed, i).expect("validated spec");
            op_norm_real(&m).powi(p as i32)
        })
    };
    let total = pairwise_sum(&powers);
    let n = trials as f64;
    let inv_p = 1.0 / p as f64;
    let estimate = (total / n).powf(inv_p);
    // Jackknife over leave-one-out replicates of the p-th-root estimator.
    let reps: Vec<f64> = powers
        .iter()
        .map(|x| ((total - x) / (n - 1.0)).powf(inv_p))
        .collect();
    let rep_mean = pairwise_sum(&reps) / n;
    let ss = pairwise_sum(&reps.iter().map(|r| (r - rep_mean) * (r - rep_mean)).collect::<Vec<_>>());
    let stderr = ((n - 1.0) / n * ss).sqrt();
    Ok(MomentEstimate {
        p,
        mean_estimate: estimate,
        stderr,
        trials,
    })
}
