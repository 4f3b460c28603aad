//! Log-log exponent extraction from empirical CDF points.

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SlopeError {
    #[error("need at least 3 grid points with count >= {min_count}, got {got}")]
    TooFewPoints { min_count: usize, got: usize },
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub stderr: f64,
    pub points_used: usize,
}

/// Minimum per-point event count for a grid point to enter the fit.
pub const MIN_COUNT: usize = 50;

/// Weighted least squares of ln(cdf) on ln(eps), restricted to points whose
/// empirical count reaches MIN_COUNT; weights are the counts. The stderr
/// comes from the weighted residuals.
pub fn fit_loglog_slope(points: &[(f64, f64, usize)]) -> Result<SlopeFit, SlopeError> {
    let qualified: Vec<(f64, f64, f64)> = points
        .iter()
        .filter(|&&(eps, cdf, count)| eps > 0.0 && cdf > 0.0 && count >= MIN_COUNT)
        .map(|&(eps, cdf, count)| (eps.ln(), cdf.ln(), count as f64))
        .collect();
    let m = qualified.len();
    if m < 3 {
        return Err(SlopeError::TooFewPoints {
            min_count: MIN_COUNT,
            got: m,
        });
    }
    let wsum: f64 = qualified.iter().map(|p| p.2).sum();
    let xbar: f64 = qualified.iter().map(|p| p.0 * p.2).sum::<f64>() / wsum;
    let ybar: f64 = qualified.iter().map(|p| p.1 * p.2).sum::<f64>() / wsum;
    let sxx: f64 = qualified
        .iter()
        .map(|p| p.2 * (p.0 - xbar) * (p.0 - xbar))
        .sum();
    let sxy: f64 = qualified
        .iter()
        .map(|p| p.2 * (p.0 - xbar) * (p.1 - ybar))
        .sum();
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let ss_res: f64 = qualified
        .iter()
        .map(|p| {
            let r = p.1 - (intercept + slope * p.0);
            p.2 * r * r
        })
        .sum();
    // weighted residual variance with m - 2 degrees of freedom, scaled by the
    // mean weight so exact fits give stderr 0 regardless of weighting
    let dof = (m - 2) as f64;
    let sigma2 = ss_res / dof / (wsum / m as f64);
    let stderr = (sigma2 / sxx * (wsum / m as f64)).sqrt();
    Ok(SlopeFit {
        slope,
        stderr,
        points_used: m,
    })
}
