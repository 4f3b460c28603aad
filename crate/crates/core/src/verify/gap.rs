//! Minimum eigenvalue gap experiment: empirical P[gap <= s] and
//! P[Im_min <= delta] against the gap theorem right-hand sides, with every
//! small-gap trial cross-validated by the disk certificate
//! sigma_n * sigma_{n-1} <= r^2 at the midpoint of the closest pair.

use super::bounds::{
    dkw_band, gap_bound_gaussian, gap_bound_general, im_min_bound_gaussian, im_min_bound_general,
    BoundConstants, BoundValue,
};
use super::report::{EmpiricalCdf, TailReport, TailRow};
use super::VerifyError;
use crate::ensemble::{estimate_norm_moment, sample_real, EnsembleSpec, Family};
use crate::linalg::{op_norm_real, C64};
use crate::rng::run_trials;
use crate::spectral::{default_tau_real, gap_certificate_check, MatrixInput};
use serde::Serialize;

#[derive(Debug, Clone)]
pub struct GapExperimentConfig {
    pub ensemble: EnsembleSpec,
    /// strictly decreasing positive grid for P[gap <= s]
    pub s_grid: Vec<f64>,
    /// strictly decreasing positive grid for P[Im_min <= delta]
    pub delta_grid: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub alpha: f64,
    /// cross-validate trials with gap below this with the disk certificate
    pub certify_below: f64,
}

impl GapExperimentConfig {
    pub fn new(ensemble: EnsembleSpec, s_grid: Vec<f64>, trials: usize, seed: u64) -> Self {
        let certify_below = s_grid.first().cloned().unwrap_or(0.0);
        let delta_grid = s_grid.clone();
        GapExperimentConfig {
            ensemble,
            s_grid,
            delta_grid,
            trials,
            seed,
            alpha: 0.01,
            certify_below,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CertificateStats {
    pub flagged: usize,
    pub passed: usize,
    /// (trial, product, r^2) for each falsification; empty means the
    /// deterministic certificate held everywhere, as it must
    pub failures: Vec<(u64, f64, f64)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct GapReport {
    pub gap: TailReport,
    pub im_min: TailReport,
    pub certificates: CertificateStats,
    pub decomposition_failures: usize,
}

struct TrialOutcome {
    gap: f64,
    im_min: f64,
    cert: Option<(bool, f64, f64)>,
    failed: bool,
}

fn gap_trial(config: &GapExperimentConfig, trial: u64) -> TrialOutcome {
    let m = sample_real(&config.ensemble, config.seed, trial).expect("validated");
    let tau = default_tau_real(&m);
    let eigs: Vec<C64> = match crate::linalg::real_matrix_eigenvalues(&m) {
        Ok(e) => e,
        Err(_) => {
            return TrialOutcome {
                gap: 0.0,
                im_min: 0.0,
                cert: None,
                failed: true,
            }
        }
    };
    let n = eigs.len();
    let mut gap = f64::INFINITY;
    let mut pair = (0usize, 0usize);
    for i in 0..n {
        for j in i + 1..n {
            let d = (eigs[i] - eigs[j]).norm();
            if d < gap {
                gap = d;
                pair = (i, j);
            }
        }
    }
    let im_min = eigs
        .iter()
        .filter(|l| l.im.abs() > tau)
        .map(|l| l.im.abs())
        .fold(f64::INFINITY, f64::min);

    let cert = if gap <= config.certify_below {
        let mid = (eigs[pair.0] + eigs[pair.1]) * 0.5;
        let r = 0.5 * gap * (1.0 + 1e-9);
        match gap_certificate_check(&MatrixInput::Real(m), mid, r) {
            Ok(rep) => Some((rep.holds, rep.product, r * r)),
            Err(_) => None,
        }
    } else {
        None
    };

    TrialOutcome {
        gap,
        im_min,
        cert,
        failed: false,
    }
}

pub fn run_gap_experiment(
    config: &GapExperimentConfig,
    constants: &BoundConstants,
    threads: usize,
) -> Result<GapReport, VerifyError> {
    if config.trials < 1_000 {
        return Err(VerifyError::InsufficientTrials {
            min: 1_000,
            got: config.trials,
        });
    }
    for grid in [&config.s_grid, &config.delta_grid] {
        if grid.is_empty() || grid.iter().any(|&s| s <= 0.0) || grid.windows(2).any(|w| w[1] >= w[0])
        {
            return Err(VerifyError::BadGrid(
                "s/delta grids must be strictly decreasing and positive".into(),
            ));
        }
    }
    config.ensemble.validate()?;

    let outcomes = run_trials(config.trials, threads, |i| gap_trial(config, i));

    let mut failures = 0usize;
    let mut cert = CertificateStats {
        flagged: 0,
        passed: 0,
        failures: vec![],
    };
    let mut gaps = Vec::with_capacity(config.trials);
    let mut im_mins = Vec::with_capacity(config.trials);
    for (i, o) in outcomes.iter().enumerate() {
        if o.failed {
            failures += 1;
        }
        gaps.push(o.gap);
        im_mins.push(o.im_min);
        if let Some((holds, product, r2)) = o.cert {
            cert.flagged += 1;
            if holds {
                cert.passed += 1;
            } else {
                cert.failures.push((i as u64, product, r2));
            }
        }
    }
    let gap_cdf = EmpiricalCdf::new(gaps);
    let im_cdf = EmpiricalCdf::new(im_mins);
    let band = dkw_band(config.trials, config.alpha);

    let n = config.ensemble.n;
    let gamma = config.ensemble.gamma;
    let shift_norm = config.ensemble.shift_norm();
    let gaussian = config.ensemble.family == Family::RealGinibre;

    let mut notes = vec![];
    // The general (non-Gaussian) theorem carries B_{M,8}, a free radius R and
    // an additive P[||A + M|| >= R]; measure the moment and estimate the tail
    // term empirically on dedicated streams.
    let general_terms = if !gaussian {
        let centered = EnsembleSpec {
            gamma: 1.0,
            shift: None,
            ..config.ensemble.clone()
        };
        let b8 = estimate_norm_moment(
            &centered,
            8,
            1_000,
            crate::rng::stream_seed(config.seed, 0x6238),
            threads,
        )?;
        let r = gamma * b8.mean_estimate + shift_norm + 1.0;
        let exceed: Vec<f64> = run_trials(1_000, threads, |i| {
            let m = sample_real(&config.ensemble, crate::rng::stream_seed(config.seed, 0x52), i)
                .expect("validated");
            if op_norm_real(&m) >= r {
                1.0
            } else {
                0.0
            }
        });
        let p_exceed = crate::linalg::mean(&exceed);
        notes.push(format!(
            "general bound uses measured B_(M,8)={:.4}, R={:.4}, empirical P[||A+gamma M|| >= R]={:.4}",
            b8.mean_estimate, r, p_exceed
        ));
        Some((b8.mean_estimate, r, p_exceed))
    } else {
        None
    };

    let density_bound = config.ensemble.density_bound();
    let gap_rows: Vec<TailRow> = config
        .s_grid
        .iter()
        .map(|&s| {
            let bound = match &general_terms {
                None => gap_bound_gaussian(n, shift_norm, gamma, s),
                Some((b8, r, p_exceed)) => BoundValue::new(
                    gap_bound_general(constants, n, shift_norm, gamma, density_bound, *b8, *r, s)
                        + p_exceed,
                ),
            };
            let escalated = general_terms.as_ref().map(|(b8, r, p_exceed)| {
                BoundValue::new(
                    gap_bound_general(
                        &constants.escalated(10.0),
                        n,
                        shift_norm,
                        gamma,
                        density_bound,
                        *b8,
                        *r,
                        s,
                    ) + p_exceed,
                )
            });
            let count = gap_cdf.count_le(s);
            TailRow::judge(s, count as f64 / config.trials as f64, count, band, bound, escalated)
        })
        .collect();

    let im_rows: Vec<TailRow> = config
        .delta_grid
        .iter()
        .map(|&d| {
            let bound = match &general_terms {
                None => im_min_bound_gaussian(n, shift_norm, gamma, d),
                Some((_, r, p_exceed)) => BoundValue::new(
                    im_min_bound_general(constants, n, gamma, density_bound, *r, d) + p_exceed,
                ),
            };
            let escalated = general_terms.as_ref().map(|(_, r, p_exceed)| {
                BoundValue::new(
                    im_min_bound_general(&constants.escalated(10.0), n, gamma, density_bound, *r, d)
                        + p_exceed,
                )
            });
            let count = im_cdf.count_le(d);
            TailRow::judge(d, count as f64 / config.trials as f64, count, band, bound, escalated)
        })
        .collect();

    let label_base = format!(
        "gap n={} gamma={} family={:?}",
        n, gamma, config.ensemble.family
    );
    Ok(GapReport {
        gap: TailReport {
            label: format!("{label_base} statistic=gap"),
            rows: gap_rows,
            slope: None,
            slope_note: None,
            trials: config.trials,
            seed: config.seed,
            alpha: config.alpha,
            notes: notes.clone(),
        },
        im_min: TailReport {
            label: format!("{label_base} statistic=im_min"),
            rows: im_rows,
            slope: None,
            slope_note: None,
            trials: config.trials,
            seed: config.seed,
            alpha: config.alpha,
            notes,
        },
        certificates: cert,
        decomposition_failures: failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;

    #[test]
    fn well_separated_shift_never_flags() {
        // A = diag(1..n) with gamma = 1e-6: the perturbation cannot close a
        // spacing of 1, so P[gap <= 0.5] must be exactly zero.
        let n = 6;
        let a = crate::linalg::RMat::from_diagonal(&DVector::from_fn(n, |i, _| (i + 1) as f64));
        let ensemble = EnsembleSpec {
            n,
            family: Family::RealGinibre,
            density_bound: None,
            gamma: 1e-6,
            shift: Some(a),
        };
        let cfg = GapExperimentConfig::new(ensemble, vec![0.5, 0.25], 1_000, 99);
        let rep = run_gap_experiment(&cfg, &BoundConstants::default(), 0).unwrap();
        assert_eq!(rep.gap.rows[0].count, 0);
        assert_eq!(rep.gap.rows[1].count, 0);
        assert_eq!(rep.certificates.flagged, 0);
    }

    #[test]
    fn certificates_hold_on_flagged_trials() {
        let ensemble = EnsembleSpec::centered(6, Family::RealGinibre, 0.5);
        let cfg = GapExperimentConfig::new(ensemble, vec![0.2, 0.1, 0.05], 2_000, 7);
        let rep = run_gap_experiment(&cfg, &BoundConstants::default(), 0).unwrap();
        assert!(rep.certificates.flagged > 0, "expected some small gaps");
        assert_eq!(rep.certificates.passed, rep.certificates.flagged);
        assert!(rep.certificates.failures.is_empty());
        assert_eq!(rep.decomposition_failures, 0);
    }

    #[test]
    fn general_family_bound_evaluates() {
        let ensemble = EnsembleSpec::centered(6, Family::Uniform, 0.5);
        let cfg = GapExperimentConfig::new(ensemble, vec![0.1, 0.05], 1_000, 3);
        let rep = run_gap_experiment(&cfg, &BoundConstants::default(), 0).unwrap();
        // the general constants are enormous at this scale: vacuous but present
        assert!(rep.gap.rows.iter().all(|r| r.verdict.is_pass()));
        assert!(!rep.gap.notes.is_empty());
    }
}
