//! Condition-number expectation experiment: per-trial sums of kappa over real
//! eigenvalues in a window and kappa^2 over nonreal eigenvalues in an
//! axis-avoiding rectangle, compared against the expectation bounds (the real
//! one in closed form, the complex one by 2-D quadrature of the integrand).

use super::bounds::{kappa_real_bound, BoundConstants};
use super::report::EmpiricalCdf;
use super::VerifyError;
use crate::ensemble::{estimate_norm_moment, sample_real, EnsembleSpec, Family};
use crate::linalg::{mean, stderr_of_mean};
use crate::rng::run_trials;
use crate::spectral::{default_tau_real, eigen_decompose, kappa_v_upper};
use serde::Serialize;
use std::f64::consts::{E, PI};

/// Rectangle-minus-strip region {x + iy : x in [x0,x1], y_min <= |y| <= y_max}.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct StripRegion {
    pub x0: f64,
    pub x1: f64,
    pub y_min: f64,
    pub y_max: f64,
}

#[derive(Debug, Clone)]
pub struct KappaExperimentConfig {
    pub ensemble: EnsembleSpec,
    /// real window (a, b) for sum of kappa over real eigenvalues
    pub omega_real: (f64, f64),
    pub omega_complex: StripRegion,
    pub trials: usize,
    pub seed: u64,
    /// Markov levels for the informational high-probability check
    pub eps1: f64,
    pub eps2: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MeanVsBound {
    pub mean: f64,
    pub stderr: f64,
    pub bound: f64,
    /// mean + 3*stderr <= bound
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct HighProbInfo {
    pub applicable: bool,
    pub note: String,
    pub prob_level: f64,
    pub real_sum_quantile: f64,
    pub real_sum_bound: f64,
    pub nonreal_sq_quantile: f64,
    pub nonreal_sq_bound: f64,
    pub kappa_v_quantile: f64,
    pub kappa_v_bound: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct KappaReport {
    pub real: MeanVsBound,
    pub complex: MeanVsBound,
    pub kappa_v_mean: f64,
    pub kappa_v_max: f64,
    pub high_prob: Option<HighProbInfo>,
    pub decomposition_failures: usize,
    pub trials: usize,
    pub seed: u64,
    pub notes: Vec<String>,
}

/// Prop 6.4-style integrand: ((gamma*normE + ||A|| + |x|)^2 + y^2) / |y|.
fn kappa_sq_integrand(x: f64, y: f64, gamma_norm_e: f64, shift_norm: f64) -> f64 {
    let c = gamma_norm_e + shift_norm + x.abs();
    (c * c + y * y) / y.abs()
}

/// Composite Simpson in 2-D over [x0,x1] x [y_min,y_max] (upper strip only;
/// callers double for the mirror strip).
pub fn simpson2d<F: Fn(f64, f64) -> f64>(
    f: F,
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    nx: usize,
    ny: usize,
) -> f64 {
    let nx = if nx % 2 == 0 { nx } else { nx + 1 };
    let ny = if ny % 2 == 0 { ny } else { ny + 1 };
    let hx = (x1 - x0) / nx as f64;
    let hy = (y1 - y0) / ny as f64;
    let wt = |i: usize, n: usize| -> f64 {
        if i == 0 || i == n {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        }
    };
    let mut acc = 0.0;
    for i in 0..=nx {
        let x = x0 + i as f64 * hx;
        let wx = wt(i, nx);
        for j in 0..=ny {
            let y = y0 + j as f64 * hy;
            acc += wx * wt(j, ny) * f(x, y);
        }
    }
    acc * hx * hy / 9.0
}

/// Expectation bound for the nonreal kappa^2 sum over the strip region:
/// coefficient * integral of the integrand over both mirror strips.
pub fn kappa_complex_bound(
    gaussian: bool,
    constants: &BoundConstants,
    n: usize,
    gamma: f64,
    density_bound: f64,
    norm_e: f64,
    shift_norm: f64,
    region: &StripRegion,
) -> f64 {
    let coeff = if gaussian {
        (7.0 * E).sqrt() / (4.0 * PI) * (n as f64).powi(5) / gamma.powi(3)
    } else {
        constants.c_thm14() * density_bound.powi(3) * (n as f64).powi(5) / gamma.powi(3)
    };
    let integral = 2.0
        * simpson2d(
            |x, y| kappa_sq_integrand(x, y, gamma * norm_e, shift_norm),
            region.x0,
            region.x1,
            region.y_min,
            region.y_max,
            200,
            200,
        );
    coeff * integral
}

struct TrialOut {
    real_sum: f64,
    nonreal_sq_sum: f64,
    kappa_v: f64,
    failed: bool,
}

pub fn run_kappa_experiment(
    config: &KappaExperimentConfig,
    constants: &BoundConstants,
    threads: usize,
) -> Result<KappaReport, VerifyError> {
    if config.trials < 100 {
        return Err(VerifyError::InsufficientTrials {
            min: 100,
            got: config.trials,
        });
    }
    config.ensemble.validate()?;
    let (a, b) = config.omega_real;
    if !(a < b) || config.omega_complex.y_min <= 0.0 {
        return Err(VerifyError::BadGrid(
            "omega_real needs a < b; omega_complex needs y_min > 0".into(),
        ));
    }

    let region = config.omega_complex;
    let outs = run_trials(config.trials, threads, |i| {
        let m = sample_real(&config.ensemble, config.seed, i).expect("validated");
        let tau = default_tau_real(&m);
        match eigen_decompose(&m, tau) {
            Ok(s) => {
                let mut real_sum = 0.0;
                let mut nonreal_sq = 0.0;
                for idx in 0..s.n() {
                    let lam = s.eigenvalues[idx];
                    let kappa = s.kappas[idx];
                    if s.real_mask[idx] {
                        if lam.re > a && lam.re < b {
                            real_sum += kappa;
                        }
                    } else if lam.re >= region.x0
                        && lam.re <= region.x1
                        && lam.im.abs() >= region.y_min
                        && lam.im.abs() <= region.y_max
                    {
                        nonreal_sq += kappa * kappa;
                    }
                }
                TrialOut {
                    real_sum,
                    nonreal_sq_sum: nonreal_sq,
                    kappa_v: kappa_v_upper(&s),
                    failed: false,
                }
            }
            Err(_) => TrialOut {
                real_sum: 0.0,
                nonreal_sq_sum: 0.0,
                kappa_v: f64::NAN,
                failed: true,
            },
        }
    });

    let failures = outs.iter().filter(|o| o.failed).count();
    let real_sums: Vec<f64> = outs.iter().filter(|o| !o.failed).map(|o| o.real_sum).collect();
    let nonreal_sums: Vec<f64> = outs
        .iter()
        .filter(|o| !o.failed)
        .map(|o| o.nonreal_sq_sum)
        .collect();
    let kappa_vs: Vec<f64> = outs.iter().filter(|o| !o.failed).map(|o| o.kappa_v).collect();

    let n = config.ensemble.n;
    let gamma = config.ensemble.gamma;
    let shift_norm = config.ensemble.shift_norm();
    let gaussian = config.ensemble.family == Family::RealGinibre;
    let density_bound = config.ensemble.density_bound();

    let mut notes = vec![];
    // E||M|| term of the complex integrand: 2 for Ginibre, measured otherwise.
    let norm_e = if gaussian {
        notes.push("E||G|| bounded by 2 in the complex integrand".into());
        2.0
    } else {
        let centered = EnsembleSpec {
            gamma: 1.0,
            shift: None,
            ..config.ensemble.clone()
        };
        let est = estimate_norm_moment(
            &centered,
            1,
            500,
            crate::rng::stream_seed(config.seed, 0x6e6f726d),
            threads,
        )?;
        notes.push(format!("E||M|| measured as {:.4}", est.mean_estimate));
        est.mean_estimate
    };

    let real_bound = kappa_real_bound(gaussian, constants, n, gamma, density_bound, b - a);
    let complex_bound = kappa_complex_bound(
        gaussian,
        constants,
        n,
        gamma,
        density_bound,
        norm_e,
        shift_norm,
        &region,
    );

    let real_mean = mean(&real_sums);
    let real_se = stderr_of_mean(&real_sums);
    let cx_mean = mean(&nonreal_sums);
    let cx_se = stderr_of_mean(&nonreal_sums);

    // Informational Markov-style high-probability check (Gaussian form needs
    // gamma < min(1, ||A||); vacuous for A = 0).
    let high_prob = if gaussian {
        let applicable = n >= 7 && gamma > 0.0 && gamma < shift_norm.min(1.0);
        let prob_level = (1.0
            - 2.0 * config.eps1
            - 30.0 * shift_norm.powf(1.6) * (n as f64).powf(1.6) / gamma.powf(1.6)
                * config.eps2.powf(0.6)
            - 2.0 * (-2.0 * n as f64).exp())
        .clamp(0.0, 1.0);
        let real_cdf = EmpiricalCdf::new(real_sums.clone());
        let cx_cdf = EmpiricalCdf::new(nonreal_sums.clone());
        let kv_cdf = EmpiricalCdf::new(kappa_vs.clone());
        Some(HighProbInfo {
            applicable,
            note: if applicable {
                "Gaussian high-probability bounds at the stated level".into()
            } else {
                "requires 0 < gamma < min(1, ||A||) and n >= 7; informational only".into()
            },
            prob_level,
            real_sum_quantile: real_cdf.quantile(prob_level),
            real_sum_bound: 5.0 / config.eps1 * n as f64 * shift_norm / gamma,
            nonreal_sq_quantile: cx_cdf.quantile(prob_level),
            nonreal_sq_bound: 1000.0 / config.eps1 * (1.0 / config.eps2).ln()
                * (n as f64).powi(5)
                * shift_norm.powi(3)
                / gamma.powi(3),
            kappa_v_quantile: kv_cdf.quantile(prob_level),
            kappa_v_bound: 1000.0 / config.eps1 * (1.0 / config.eps2).ln().sqrt()
                * (n as f64).powi(3)
                * shift_norm.powf(1.5)
                / gamma.powf(1.5),
        })
    } else {
        None
    };

    Ok(KappaReport {
        real: MeanVsBound {
            mean: real_mean,
            stderr: real_se,
            bound: real_bound,
            pass: real_mean + 3.0 * real_se <= real_bound,
        },
        complex: MeanVsBound {
            mean: cx_mean,
            stderr: cx_se,
            bound: complex_bound,
            pass: cx_mean + 3.0 * cx_se <= complex_bound,
        },
        kappa_v_mean: mean(&kappa_vs),
        kappa_v_max: kappa_vs.iter().cloned().fold(0.0, f64::max),
        high_prob,
        decomposition_failures: failures,
        trials: config.trials,
        seed: config.seed,
        notes,
    })
}
