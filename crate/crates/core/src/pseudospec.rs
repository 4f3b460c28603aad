//! Epsilon-pseudospectrum geometry: sigma_min evaluation and grids, the
//! Lebesgue length of the pseudospectrum on the real line, the off-axis area
//! by cell counting, the limiting ratios length/eps -> 2*sum kappa (real
//! spectrum) and area/eps^2 -> pi*sum kappa^2 (nonreal spectrum), and the
//! bounded-rank inclusion check for B = A (x) I_r.

use crate::linalg::{
    ensure_finite_complex, ensure_finite_real, shift_complex, shift_real, sigma_min_complex,
    sigma_min_real, singular_values_real, C64, RMat,
};
use crate::spectral::{eigen_decompose, MatrixInput, SpectralError};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PseudoError {
    #[error("degenerate region: need x0 < x1, y0 < y1 and resolution >= 2x2")]
    DegenerateRegion,
    #[error("epsilon must be positive")]
    BadEpsilon,
    #[error("interval must satisfy a < b")]
    BadInterval,
    #[error(
        "resolution too coarse: eps-disks (diameter >= {disk:.3e}) span fewer than 3 cells of size {cell:.3e}"
    )]
    ResolutionTooCoarse { disk: f64, cell: f64 },
    #[error("perturbation rank too high: sigma_{r}(M) = {sigma:.3e} > 1e-10 * sigma_1 = {limit:.3e}")]
    RankTooHigh { r: usize, sigma: f64, limit: f64 },
    #[error("matrix shape mismatch: {0}")]
    Shape(String),
    #[error("eps schedule must be strictly decreasing and positive")]
    BadEpsSchedule,
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    LinAlg(#[from] crate::linalg::LinAlgError),
}

/// Closed rectangle [x0, x1] x [y0, y1] in the complex plane.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct Region {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Region {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        Region { x0, x1, y0, y1 }
    }
}

/// sigma_min(z*I - M).
pub fn sigma_min_at(m: &MatrixInput, z: C64) -> Result<f64, PseudoError> {
    match m {
        MatrixInput::Real(r) => {
            ensure_finite_real(r)?;
            if z.im == 0.0 {
                // real shift of a real matrix stays real
                let mut s = -r.clone();
                for i in 0..r.nrows() {
                    s[(i, i)] += z.re;
                }
                Ok(sigma_min_real(&s))
            } else {
                Ok(sigma_min_complex(&shift_real(r, z)))
            }
        }
        MatrixInput::Complex(c) => {
            ensure_finite_complex(c)?;
            Ok(sigma_min_complex(&shift_complex(c, z)))
        }
    }
}

/// Dense sigma_min samples over a rectangular grid. Grid points are the
/// endpoint-inclusive lattice x_i = x0 + i*(x1-x0)/(nx-1), y_j likewise;
/// `values` is stored row-major in i (the x index) with j varying fastest:
/// `values[i * ny + j] = sigma_min(x_i + i*y_j - M)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PseudospectrumGrid {
    pub region: Region,
    pub nx: usize,
    pub ny: usize,
    pub values: Vec<f64>,
}

impl PseudospectrumGrid {
    pub fn point(&self, i: usize, j: usize) -> (f64, f64) {
        let x = self.region.x0 + i as f64 * (self.region.x1 - self.region.x0) / (self.nx - 1) as f64;
        let y = self.region.y0 + j as f64 * (self.region.y1 - self.region.y0) / (self.ny - 1) as f64;
        (x, y)
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.ny + j]
    }

    /// Number of grid points inside the eps-pseudospectrum.
    pub fn member_count(&self, eps: f64) -> usize {
        self.values.iter().filter(|&&v| v <= eps).count()
    }
}

pub fn grid_sigma_min(
    m: &MatrixInput,
    region: Region,
    nx: usize,
    ny: usize,
) -> Result<PseudospectrumGrid, PseudoError> {
    if !(region.x0 < region.x1 && region.y0 < region.y1) || nx < 2 || ny < 2 {
        return Err(PseudoError::DegenerateRegion);
    }
    let mut values = Vec::with_capacity(nx * ny);
    for i in 0..nx {
        let x = region.x0 + i as f64 * (region.x1 - region.x0) / (nx - 1) as f64;
        for j in 0..ny {
            let y = region.y0 + j as f64 * (region.y1 - region.y0) / (ny - 1) as f64;
            values.push(sigma_min_at(m, C64::new(x, y))?);
        }
    }
    Ok(PseudospectrumGrid {
        region,
        nx,
        ny,
        values,
    })
}

/// Lebesgue measure of {x in [a,b] : sigma_min(x - M) <= eps}, by a coarse
/// scan at step eps/4 followed by bisection of each boundary crossing down to
/// width rel_tol * eps.
pub fn real_axis_eps_length(
    m: &RMat,
    eps: f64,
    a: f64,
    b: f64,
    rel_tol: f64,
) -> Result<f64, PseudoError> {
    if eps <= 0.0 {
        return Err(PseudoError::BadEpsilon);
    }
    if !(a < b) {
        return Err(PseudoError::BadInterval);
    }
    ensure_finite_real(m)?;
    let n = m.nrows();
    let f = |x: f64| -> f64 {
        let mut s = -m.clone();
        for i in 0..n {
            s[(i, i)] += x;
        }
        sigma_min_real(&s) - eps
    };
    let step = eps / 4.0;
    let steps = ((b - a) / step).ceil() as usize;
    let target = (rel_tol * eps).max(f64::EPSILON * (a.abs().max(b.abs()) + 1.0));
    let bisect = |mut lo: f64, mut hi: f64, lo_inside: bool| -> f64 {
        while hi - lo > target {
            let mid = 0.5 * (lo + hi);
            let mid_inside = f(mid) <= 0.0;
            if mid_inside == lo_inside {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };

    let mut total = 0.0;
    let mut prev_x = a;
    let mut prev_inside = f(a) <= 0.0;
    let mut start = if prev_inside { Some(a) } else { None };
    for k in 1..=steps {
        let x = if k == steps { b } else { a + k as f64 * step };
        let inside = f(x) <= 0.0;
        if inside != prev_inside {
            let boundary = bisect(prev_x, x, prev_inside);
            if inside {
                start = Some(boundary);
            } else if let Some(s) = start.take() {
                total += boundary - s;
            }
        }
        prev_x = x;
        prev_inside = inside;
    }
    if let Some(s) = start {
        total += b - s;
    }
    Ok(total)
}

/// Area of the eps-pseudospectrum inside `region`, off the real axis, by cell
/// counting at cell centers with one optional level of 4x subdivision on
/// boundary cells. Cells whose center lies in the strip |Im z| <= tau_real do
/// not count toward `area`; `area_strip_included` counts them too.
#[derive(Debug, Clone, Serialize)]
pub struct AreaReport {
    pub area: f64,
    pub area_strip_included: f64,
    pub member_cells: usize,
    pub boundary_cells: usize,
}

pub fn complex_eps_area(
    m: &MatrixInput,
    eps: f64,
    region: Region,
    nx: usize,
    ny: usize,
    subdivide: bool,
    tau_real: f64,
) -> Result<AreaReport, PseudoError> {
    if eps <= 0.0 {
        return Err(PseudoError::BadEpsilon);
    }
    if !(region.x0 < region.x1 && region.y0 < region.y1) || nx < 2 || ny < 2 {
        return Err(PseudoError::DegenerateRegion);
    }
    let dx = (region.x1 - region.x0) / nx as f64;
    let dy = (region.y1 - region.y0) / ny as f64;
    let cell = dx.max(dy);

    let smin = |x: f64, y: f64| sigma_min_at(m, C64::new(x, y));
    let mut member = vec![false; nx * ny];
    let mut any_member = false;
    for i in 0..nx {
        let x = region.x0 + (i as f64 + 0.5) * dx;
        for j in 0..ny {
            let y = region.y0 + (j as f64 + 0.5) * dy;
            let inside = smin(x, y)? <= eps;
            member[i * ny + j] = inside;
            any_member |= inside;
        }
    }
    // Disks have radius kappa_i * eps >= eps; if even the guaranteed minimum
    // diameter 2*eps spans fewer than 3 cells, the count is untrustworthy.
    if any_member && 2.0 * eps < 3.0 * cell {
        return Err(PseudoError::ResolutionTooCoarse {
            disk: 2.0 * eps,
            cell,
        });
    }

    let is_boundary = |i: usize, j: usize| -> bool {
        let me = member[i * ny + j];
        let mut differs = false;
        if i > 0 {
            differs |= member[(i - 1) * ny + j] != me;
        }
        if i + 1 < nx {
            differs |= member[(i + 1) * ny + j] != me;
        }
        if j > 0 {
            differs |= member[i * ny + j - 1] != me;
        }
        if j + 1 < ny {
            differs |= member[i * ny + j + 1] != me;
        }
        differs
    };

    // Quarter-cell counting keeps the accumulation exact in integers.
    let mut quarters_excl: u64 = 0;
    let mut quarters_incl: u64 = 0;
    let mut member_cells = 0usize;
    let mut boundary_cells = 0usize;
    for i in 0..nx {
        let x = region.x0 + (i as f64 + 0.5) * dx;
        for j in 0..ny {
            let y = region.y0 + (j as f64 + 0.5) * dy;
            let me = member[i * ny + j];
            if me {
                member_cells += 1;
            }
            let boundary = subdivide && is_boundary(i, j);
            if boundary {
                boundary_cells += 1;
                for (si, sj) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                    let sx = x + (si as f64 - 0.5) * dx / 2.0;
                    let sy = y + (sj as f64 - 0.5) * dy / 2.0;
                    if smin(sx, sy)? <= eps {
                        quarters_incl += 1;
                        if sy.abs() > tau_real {
                            quarters_excl += 1;
                        }
                    }
                }
            } else if me {
                quarters_incl += 4;
                if y.abs() > tau_real {
                    quarters_excl += 4;
                }
            }
        }
    }
    let cell_area = dx * dy;
    Ok(AreaReport {
        area: quarters_excl as f64 * cell_area / 4.0,
        area_strip_included: quarters_incl as f64 * cell_area / 4.0,
        member_cells,
        boundary_cells,
    })
}

/// Ratios length/eps and area/eps^2 along a decreasing eps schedule, with the
/// spectral targets 2*sum_{real} kappa and pi*sum_{nonreal} kappa^2.
///
/// The off-axis area is measured in tight square windows around each nonreal
/// eigenvalue (upper half plane, doubled by conjugate symmetry), which keeps
/// 512^2-class resolutions adequate for disks of radius kappa*eps and keeps
/// the disks of real eigenvalues out of the complex-area count entirely.
#[derive(Debug, Clone, Serialize)]
pub struct RatioReport {
    pub eps: Vec<f64>,
    pub real_ratios: Vec<f64>,
    pub complex_ratios: Vec<f64>,
    pub real_target: f64,
    pub complex_target: f64,
    /// strip-included vs strip-excluded areas differed by more than 1%
    pub strip_divergence: Vec<bool>,
}

pub struct RatioOptions {
    /// one-sided window resolution for area windows
    pub resolution: usize,
    /// window half-width in units of kappa_i * eps
    pub window_factor: f64,
    /// bisection tolerance for the real-line length
    pub rel_tol: f64,
    pub subdivide: bool,
}

impl Default for RatioOptions {
    fn default() -> Self {
        RatioOptions {
            resolution: 512,
            window_factor: 8.0,
            rel_tol: 1e-3,
            subdivide: true,
        }
    }
}

pub fn limiting_ratios(
    m: &RMat,
    eps_list: &[f64],
    opts: &RatioOptions,
) -> Result<RatioReport, PseudoError> {
    if eps_list.is_empty()
        || eps_list.iter().any(|&e| e <= 0.0)
        || eps_list.windows(2).any(|w| w[1] >= w[0])
    {
        return Err(PseudoError::BadEpsSchedule);
    }
    let tau = crate::spectral::default_tau_real(m);
    let summary = eigen_decompose(m, tau)?;
    let real_target = 2.0 * summary.real_kappa_sum();
    let complex_target = std::f64::consts::PI * summary.nonreal_kappa_sq_sum();

    let re_min = summary
        .eigenvalues
        .iter()
        .map(|l| l.re)
        .fold(f64::INFINITY, f64::min);
    let re_max = summary
        .eigenvalues
        .iter()
        .map(|l| l.re)
        .fold(f64::NEG_INFINITY, f64::max);
    let max_kappa = summary.kappas.iter().cloned().fold(1.0, f64::max);

    let mi = MatrixInput::Real(m.clone());
    let mut real_ratios = Vec::with_capacity(eps_list.len());
    let mut complex_ratios = Vec::with_capacity(eps_list.len());
    let mut strip_divergence = Vec::with_capacity(eps_list.len());

    for &eps in eps_list {
        // Real line: scan an interval that contains every disk that can
        // touch the axis.
        let margin = 2.0 * max_kappa * eps + 0.1;
        let len = real_axis_eps_length(m, eps, re_min - margin, re_max + margin, opts.rel_tol)?;
        real_ratios.push(len / eps);

        // Off-axis: windows around upper-half-plane eigenvalues, doubled.
        let mut area = 0.0;
        let mut divergent = false;
        for (idx, lam) in summary.eigenvalues.iter().enumerate() {
            if lam.im <= tau {
                continue;
            }
            let kappa = summary.kappas[idx];
            let mut w = opts.window_factor * kappa * eps;
            // keep the window off the axis and clear of other eigenvalues
            let mut nearest = f64::INFINITY;
            for (jdx, mu) in summary.eigenvalues.iter().enumerate() {
                if jdx != idx {
                    nearest = nearest.min((lam - mu).norm());
                }
            }
            w = w.min(0.45 * lam.im).min(0.45 * nearest);
            if w < 2.0 * kappa * eps {
                return Err(PseudoError::ResolutionTooCoarse {
                    disk: 2.0 * kappa * eps,
                    cell: w,
                });
            }
            let region = Region::new(lam.re - w, lam.re + w, lam.im - w, lam.im + w);
            let rep = complex_eps_area(
                &mi,
                eps,
                region,
                opts.resolution,
                opts.resolution,
                opts.subdivide,
                tau,
            )?;
            area += 2.0 * rep.area;
            let denom = rep.area.abs().max(1e-300);
            if ((rep.area_strip_included - rep.area) / denom).abs() > 0.01 {
                divergent = true;
            }
        }
        complex_ratios.push(area / (eps * eps));
        strip_divergence.push(divergent);
    }

    Ok(RatioReport {
        eps: eps_list.to_vec(),
        real_ratios,
        complex_ratios,
        real_target,
        complex_target,
        strip_divergence,
    })
}

/// Bounded-rank inclusion: with B = A (x) I_r and rank(M) <= r-1, every shift
/// satisfies sigma_min(z - B - M) <= sigma_min(z - B), i.e. the perturbation
/// cannot shrink the pseudospectrum.
#[derive(Debug, Clone, Serialize)]
pub struct RankInclusionReport {
    pub holds: bool,
    pub max_violation: f64,
    pub grid_points: usize,
}

pub fn rank_inclusion_check(
    a: &RMat,
    r: usize,
    m_pert: &RMat,
    region: Region,
    nx: usize,
    ny: usize,
) -> Result<RankInclusionReport, PseudoError> {
    if r == 0 {
        return Err(PseudoError::Shape("r must be >= 1".into()));
    }
    let n = a.nrows();
    if a.ncols() != n {
        return Err(PseudoError::Shape(format!(
            "A must be square, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    let nb = n * r;
    if m_pert.nrows() != nb || m_pert.ncols() != nb {
        return Err(PseudoError::Shape(format!(
            "perturbation must be {nb}x{nb}, got {}x{}",
            m_pert.nrows(),
            m_pert.ncols()
        )));
    }
    if nx < 2 || ny < 2 || !(region.x0 < region.x1 && region.y0 < region.y1) {
        return Err(PseudoError::DegenerateRegion);
    }
    let sv = singular_values_real(m_pert);
    let sigma1 = sv[0];
    if sigma1 > 0.0 {
        // rank(M) <= r-1 means sigma_r must vanish (numerically).
        let sigma_r = if r <= nb { sv[r - 1] } else { 0.0 };
        let limit = 1e-10 * sigma1;
        if r == 1 || sigma_r > limit {
            if r == 1 {
                return Err(PseudoError::RankTooHigh {
                    r,
                    sigma: sigma1,
                    limit: 0.0,
                });
            }
            return Err(PseudoError::RankTooHigh {
                r,
                sigma: sigma_r,
                limit,
            });
        }
    }

    let b = a.kronecker(&RMat::identity(r, r));
    let bm = &b + m_pert;
    let mut max_violation: f64 = 0.0;
    let mut points = 0usize;
    for i in 0..nx {
        let x = region.x0 + i as f64 * (region.x1 - region.x0) / (nx - 1) as f64;
        for j in 0..ny {
            let y = region.y0 + j as f64 * (region.y1 - region.y0) / (ny - 1) as f64;
            let z = C64::new(x, y);
            let lhs = sigma_min_complex(&shift_real(&bm, z));
            let rhs = sigma_min_complex(&shift_real(&b, z));
            max_violation = max_violation.max(lhs - rhs);
            points += 1;
        }
    }
    Ok(RankInclusionReport {
        holds: max_violation <= 1e-10,
        max_violation,
        grid_points: points,
    })
}

/// Randomized batch of rank-inclusion checks, as exposed by
/// `verify rank-inclusion`: for each r, `pairs` random (A, rank-(r-1) M)
/// pairs on a shared grid, expecting zero violations.
#[derive(Debug, Clone)]
pub struct RankInclusionSuiteConfig {
    pub n: usize,
    pub r_list: Vec<usize>,
    pub pairs: usize,
    pub region: Region,
    pub nx: usize,
    pub ny: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RankInclusionSuiteReport {
    pub checks: usize,
    pub violations: usize,
    pub max_violation: f64,
    pub holds: bool,
}

pub fn run_rank_inclusion_suite(
    cfg: &RankInclusionSuiteConfig,
    threads: usize,
) -> Result<RankInclusionSuiteReport, PseudoError> {
    use rand::Rng;
    use rand_distr::StandardNormal;

    let mut tasks: Vec<(usize, u64)> = Vec::new();
    for &r in &cfg.r_list {
        for p in 0..cfg.pairs as u64 {
            tasks.push((r, p));
        }
    }
    let reports: Vec<Result<RankInclusionReport, PseudoError>> =
        crate::rng::run_trials(tasks.len(), threads, |i| {
            let (r, p) = tasks[i as usize];
            let mut rng =
                crate::rng::stream_rng(cfg.seed, (r as u64) << 32 | p);
            let a = RMat::from_fn(cfg.n, cfg.n, |_, _| rng.sample::<f64, _>(StandardNormal));
            let nb = cfg.n * r;
            // rank r-1 perturbation from r-1 outer products
            let mut m = RMat::zeros(nb, nb);
            for _ in 0..r - 1 {
                let u = nalgebra::DVector::from_fn(nb, |_, _| {
                    rng.sample::<f64, _>(StandardNormal)
                });
                let v = nalgebra::DVector::from_fn(nb, |_, _| {
                    rng.sample::<f64, _>(StandardNormal)
                });
                m += u * v.transpose();
            }
            rank_inclusion_check(&a, r, &m, cfg.region, cfg.nx, cfg.ny)
        });
    let mut checks = 0usize;
    let mut violations = 0usize;
    let mut max_violation = 0.0f64;
    for rep in reports {
        let rep = rep?;
        checks += 1;
        if !rep.holds {
            violations += 1;
        }
        max_violation = max_violation.max(rep.max_violation);
    }
    Ok(RankInclusionSuiteReport {
        checks,
        violations,
        max_violation,
        holds: violations == 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;

    fn diag(vals: &[f64]) -> RMat {
        RMat::from_diagonal(&DVector::from_vec(vals.to_vec()))
    }

    #[test]
    fn sigma_min_at_zero_matrix() {
        let m = MatrixInput::Real(RMat::zeros(3, 3));
        let z = C64::new(0.3, -0.4);
        let s = sigma_min_at(&m, z).unwrap();
        assert!((s - 0.5).abs() < 1e-12);
    }

    #[test]
    fn sigma_min_at_diagonal() {
        let m = MatrixInput::Real(diag(&[1.0, 2.0]));
        let s = sigma_min_at(&m, C64::new(1.5, 0.0)).unwrap();
        assert!((s - 0.5).abs() < 1e-12);
    }

    #[test]
    fn sigma_min_matches_full_svd() {
        for trial in 0..20 {
            let m = RMat::from_fn(5, 5, |i, j| ((i * 7 + j * 3 + trial) as f64).sin());
            let z = C64::new(0.3 * (trial as f64).cos(), 0.2 + 0.1 * trial as f64);
            let direct = sigma_min_at(&MatrixInput::Real(m.clone()), z).unwrap();
            let sv = crate::linalg::singular_values_complex(&shift_real(&m, z));
            assert!((direct - sv[sv.len() - 1]).abs() < 1e-12);
        }
    }

    #[test]
    fn grid_constant_matrix_gives_modulus() {
        let m = MatrixInput::Real(RMat::zeros(2, 2));
        let g = grid_sigma_min(&m, Region::new(-1.0, 1.0, -1.0, 1.0), 5, 5).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                let (x, y) = g.point(i, j);
                assert!((g.value(i, j) - (x * x + y * y).sqrt()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn grid_refinement_agrees_at_shared_points() {
        let m = MatrixInput::Real(diag(&[0.0, 1.0]));
        let region = Region::new(-1.0, 1.0, -1.0, 1.0);
        let coarse = grid_sigma_min(&m, region, 5, 5).unwrap();
        let fine = grid_sigma_min(&m, region, 9, 9).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                assert_eq!(coarse.value(i, j), fine.value(2 * i, 2 * j));
            }
        }
    }

    #[test]
    fn membership_monotone_in_eps() {
        let m = MatrixInput::Real(diag(&[0.0, 1.0]));
        let g = grid_sigma_min(&m, Region::new(-1.0, 2.0, -1.0, 1.0), 21, 21).unwrap();
        let mut prev = 0;
        for eps in [0.01, 0.05, 0.1, 0.5, 1.0] {
            let c = g.member_count(eps);
            assert!(c >= prev);
            prev = c;
        }
    }

    #[test]
    fn degenerate_region_rejected() {
        let m = MatrixInput::Real(RMat::zeros(2, 2));
        assert!(matches!(
            grid_sigma_min(&m, Region::new(1.0, -1.0, 0.0, 1.0), 4, 4),
            Err(PseudoError::DegenerateRegion)
        ));
        assert!(matches!(
            grid_sigma_min(&m, Region::new(-1.0, 1.0, 0.0, 1.0), 1, 4),
            Err(PseudoError::DegenerateRegion)
        ));
    }

    #[test]
    fn real_length_two_disjoint_disks() {
        // diag(0,1) is normal: Lambda_eps is two eps-disks, meeting the line
        // in two intervals of length 2*eps.
        let m = diag(&[0.0, 1.0]);
        let len = real_axis_eps_length(&m, 0.01, -1.0, 2.0, 1e-4).unwrap();
        assert!((len - 0.04).abs() < 1e-5, "len {len}");
    }

    #[test]
    fn real_length_overlapping_intervals() {
        let m = diag(&[0.0, 0.015]);
        let len = real_axis_eps_length(&m, 0.01, -1.0, 1.0, 1e-4).unwrap();
        assert!((len - 0.035).abs() < 1e-5, "len {len}");
    }

    #[test]
    fn real_length_empty_set() {
        let m = diag(&[5.0, 6.0]);
        let len = real_axis_eps_length(&m, 0.01, -1.0, 1.0, 1e-3).unwrap();
        assert_eq!(len, 0.0);
    }

    #[test]
    fn real_length_additive_and_conjugation_invariant() {
        let m = diag(&[0.0, 1.0]);
        let eps = 0.01;
        let whole = real_axis_eps_length(&m, eps, -1.0, 2.0, 1e-4).unwrap();
        let left = real_axis_eps_length(&m, eps, -1.0, 0.5, 1e-4).unwrap();
        let right = real_axis_eps_length(&m, eps, 0.5, 2.0, 1e-4).unwrap();
        assert!((whole - left - right).abs() < 1e-6);

        // rotate by an orthogonal similarity
        let c = std::f64::consts::FRAC_1_SQRT_2;
        let q = RMat::from_row_slice(2, 2, &[c, -c, c, c]);
        let rotated = &q.transpose() * &m * &q;
        let rot_len = real_axis_eps_length(&rotated, eps, -1.0, 2.0, 1e-4).unwrap();
        assert!((whole - rot_len).abs() < 1e-4 * whole.max(1.0));
    }

    #[test]
    fn jordan_block_ratio_hits_eq1_target() {
        // [[0,1],[0,1]]: both kappas sqrt(2), so length/eps -> 4*sqrt(2).
        let m = RMat::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 1.0]);
        let eps = 1e-5;
        let len = real_axis_eps_length(&m, eps, -0.5, 1.5, 1e-3).unwrap();
        let target = 4.0 * 2f64.sqrt();
        let ratio = len / eps;
        assert!(
            (ratio - target).abs() < 0.01 * target,
            "ratio {ratio} vs {target}"
        );
    }

    #[test]
    fn all_real_spectrum_gives_zero_offaxis_area() {
        // Coarse-relative-to-eps grid: no cell center comes within eps of the
        // axis, and there are no off-axis disks at all.
        let m = MatrixInput::Real(diag(&[0.0, 1.0]));
        let rep = complex_eps_area(
            &m,
            5e-4,
            Region::new(-0.5, 1.5, -0.5, 0.5),
            512,
            512,
            true,
            1e-10,
        )
        .unwrap();
        assert_eq!(rep.member_cells, 0);
        assert_eq!(rep.area, 0.0);
    }

    #[test]
    fn rotation_disk_area() {
        // Disk of radius eps around +i, measured in a tight window.
        let eps = 1e-3;
        let m = MatrixInput::Real(RMat::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]));
        let w = 4.0 * eps;
        let rep = complex_eps_area(
            &m,
            eps,
            Region::new(-w, w, 1.0 - w, 1.0 + w),
            128,
            128,
            true,
            1e-10,
        )
        .unwrap();
        let target = std::f64::consts::PI * eps * eps;
        assert!(
            (rep.area - target).abs() < 0.02 * target,
            "area {} vs {target}",
            rep.area
        );
    }

    #[test]
    fn too_coarse_grid_is_reported() {
        // 100x100 on [-2,2]^2 has 0.04 cells; eps = 0.03 puts a few centers
        // inside the disks around +-i while 2*eps spans less than 3 cells.
        let m = MatrixInput::Real(RMat::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]));
        let res = complex_eps_area(
            &m,
            0.03,
            Region::new(-2.0, 2.0, -2.0, 2.0),
            100,
            100,
            false,
            1e-10,
        );
        assert!(matches!(res, Err(PseudoError::ResolutionTooCoarse { .. })));
    }

    #[test]
    fn limiting_ratios_rotation() {
        let m = RMat::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        let opts = RatioOptions {
            resolution: 256,
            ..Default::default()
        };
        let rep = limiting_ratios(&m, &[1e-2, 1e-3], &opts).unwrap();
        assert!((rep.complex_target - 2.0 * std::f64::consts::PI).abs() < 1e-9);
        assert_eq!(rep.real_target, 0.0);
        let last = *rep.complex_ratios.last().unwrap();
        assert!(
            (last - rep.complex_target).abs() < 0.03 * rep.complex_target,
            "ratio {last}"
        );
        assert!(rep.real_ratios.iter().all(|&r| r == 0.0));
    }

    #[test]
    fn limiting_ratios_diag() {
        let m = diag(&[0.0, 1.0]);
        let rep = limiting_ratios(&m, &[1e-4, 1e-5], &RatioOptions::default()).unwrap();
        assert!((rep.real_target - 4.0).abs() < 1e-9);
        let last = *rep.real_ratios.last().unwrap();
        assert!((last - 4.0).abs() < 0.01 * 4.0, "ratio {last}");
    }

    #[test]
    fn rank_inclusion_r1_requires_zero_perturbation() {
        let a = RMat::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        let zero = RMat::zeros(2, 2);
        let rep = rank_inclusion_check(
            &a,
            1,
            &zero,
            Region::new(-1.0, 1.0, -1.0, 1.0),
            5,
            5,
        )
        .unwrap();
        assert!(rep.holds);
        assert!(rep.max_violation.abs() < 1e-14);

        let nonzero = RMat::from_fn(2, 2, |i, j| (i + j) as f64 * 0.1);
        assert!(matches!(
            rank_inclusion_check(&a, 1, &nonzero, Region::new(-1.0, 1.0, -1.0, 1.0), 5, 5),
            Err(PseudoError::RankTooHigh { .. })
        ));
    }

    #[test]
    fn rank_inclusion_rank_one_perturbation() {
        // r = 2: B = A (x) I_2 (6x6), rank-1 perturbation from an outer
        // product; the inclusion must hold on the whole grid.
        let a = RMat::from_row_slice(3, 3, &[0.2, 1.0, 0.0, 0.0, 0.2, 1.0, 0.3, 0.0, -0.5]);
        let u = DVector::from_vec(vec![1.0, -0.5, 0.25, 0.0, 0.7, -0.2]);
        let v = DVector::from_vec(vec![0.3, 0.4, -1.0, 0.9, 0.1, 0.6]);
        let m = &u * v.transpose();
        let rep = rank_inclusion_check(
            &a,
            2,
            &m,
            Region::new(-2.0, 2.0, -2.0, 2.0),
            10,
            10,
        )
        .unwrap();
        assert!(rep.holds, "violation {}", rep.max_violation);
    }
}
