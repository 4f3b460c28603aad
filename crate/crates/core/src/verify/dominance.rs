//! Stochastic dominance of singular values under shared Gaussian additive
//! noise: if sigma_i(A1) <= sigma_i(A2) for all i, then each sigma_i(A1 + tX)
//! is stochastically dominated by sigma_i(A2 + tX). Tested per index with a
//! one-sided empirical-CDF comparison under a doubled DKW band.

use super::bounds::dkw_band;
use super::VerifyError;
use crate::linalg::{singular_values_real, RMat};
use crate::rng::{run_trials, stream_rng};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

#[derive(Debug, Clone)]
pub struct DominanceConfig {
    pub a1: RMat,
    pub a2: RMat,
    pub t: f64,
    pub trials: usize,
    pub seed: u64,
    pub alpha: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct IndexVerdict {
    pub index: usize,
    /// max over s of F_{A2,i}(s) - F_{A1,i}(s); dominance predicts <= 0 up to
    /// sampling noise
    pub max_gap: f64,
    pub band: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct DominanceReport {
    pub per_index: Vec<IndexVerdict>,
    pub pass: bool,
    pub trials: usize,
    pub seed: u64,
}

/// One-sided sup of F_b - F_a over all thresholds (attained at sample points).
fn one_sided_sup(a: &mut [f64], b: &mut [f64]) -> f64 {
    a.sort_by(|x, y| x.partial_cmp(y).unwrap());
    b.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let n = a.len() as f64;
    let mut sup: f64 = 0.0;
    let (mut ia, mut ib) = (0usize, 0usize);
    while ib < b.len() {
        let s = b[ib];
        while ib < b.len() && b[ib] <= s {
            ib += 1;
        }
        while ia < a.len() && a[ia] <= s {
            ia += 1;
        }
        sup = sup.max(ib as f64 / n - ia as f64 / n);
    }
    sup
}

pub fn run_dominance_check(
    config: &DominanceConfig,
    threads: usize,
) -> Result<DominanceReport, VerifyError> {
    let (n, k) = (config.a1.nrows(), config.a1.ncols());
    if config.a2.nrows() != n || config.a2.ncols() != k {
        return Err(VerifyError::BadGrid("A1 and A2 must share a shape".into()));
    }
    if config.trials < 1_000 {
        return Err(VerifyError::InsufficientTrials {
            min: 1_000,
            got: config.trials,
        });
    }
    let s1 = singular_values_real(&config.a1);
    let s2 = singular_values_real(&config.a2);
    let scale = s2[0].max(1.0);
    for i in 0..k {
        if s1[i] > s2[i] + 1e-12 * scale {
            return Err(VerifyError::PreconditionViolated(format!(
                "sigma_{}(A1) = {} > sigma_{}(A2) = {}",
                i + 1,
                s1[i],
                i + 1,
                s2[i]
            )));
        }
    }

    // Shared X per trial: a variance-reduction choice; the dominance claim is
    // about the marginal laws, which shared sampling also exercises.
    let pairs: Vec<(Vec<f64>, Vec<f64>)> = run_trials(config.trials, threads, |i| {
        let mut rng = stream_rng(config.seed, i);
        let x = RMat::from_fn(n, k, |_, _| rng.sample::<f64, _>(StandardNormal));
        let sx1 = singular_values_real(&(&config.a1 + &x * config.t));
        let sx2 = singular_values_real(&(&config.a2 + &x * config.t));
        (sx1, sx2)
    });

    let band = dkw_band(config.trials, config.alpha);
    let mut per_index = Vec::with_capacity(k);
    for i in 0..k {
        let mut v1: Vec<f64> = pairs.iter().map(|p| p.0[i]).collect();
        let mut v2: Vec<f64> = pairs.iter().map(|p| p.1[i]).collect();
        // F_{A1,i}(s) >= F_{A2,i}(s) - 2 band for all s
        let max_gap = one_sided_sup(&mut v1, &mut v2);
        per_index.push(IndexVerdict {
            index: i + 1,
            max_gap,
            band,
            pass: max_gap <= 2.0 * band,
        });
    }
    let pass = per_index.iter().all(|v| v.pass);
    Ok(DominanceReport {
        per_index,
        pass,
        trials: config.trials,
        seed: config.seed,
    })
}
