//! Dense spectral analysis of real matrices: eigenvalue condition numbers
//! kappa(lambda_i) = ||v_i||*||w_i|| under the normalization w_i* v_i = 1, the
//! overlap matrix, eigenvalue gap statistics, and the two-eigenvalue disk
//! certificate sigma_n * sigma_{n-1} <= r^2.

use crate::linalg::{
    complex_eigenvalues, ensure_finite_complex, ensure_finite_real, shift_complex, shift_real,
    singular_values_complex, to_complex, C64, CMat, RMat,
};
use nalgebra::DVector;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("matrix contains non-finite entries")]
    NonFinite,
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix needs at least {min} rows, got {got}")]
    TooSmall { min: usize, got: usize },
    #[error(
        "eigenvalues too close or defective: min separation {sep:.3e} <= threshold {threshold:.3e}; kappa is undefined"
    )]
    DefectiveOrClustered { sep: f64, threshold: f64 },
    #[error("eigenvector iteration failed to converge (residual {residual:.3e})")]
    EigenvectorFailure { residual: f64 },
    #[error("eigenvector matrix numerically singular, kappa undefined")]
    SingularEigenvectorMatrix,
    #[error(transparent)]
    LinAlg(#[from] crate::linalg::LinAlgError),
}

/// Default threshold below which |Im lambda| is treated as zero.
pub fn default_tau_real(m: &RMat) -> f64 {
    1e-10 * m.norm().max(1.0)
}

/// Eigendecomposition of a real matrix with per-eigenvalue condition numbers.
///
/// Right eigenvectors have unit norm; left rows are the rows of V^{-1}, which
/// makes the biorthogonality w_i* v_j = delta_ij hold by construction.
#[derive(Debug, Clone)]
pub struct SpectralSummary {
    pub eigenvalues: Vec<C64>,
    /// Columns are the unit-norm right eigenvectors v_i.
    pub right_vectors: CMat,
    /// Row i is w_i^* (row i of V^{-1}).
    pub left_rows: CMat,
    pub kappas: Vec<f64>,
    /// overlap[(i, j)] = v_j^* v_i * conj(w_j^* w_i); diagonal = kappa_i^2.
    pub overlap: CMat,
    pub real_mask: Vec<bool>,
    pub tau_real: f64,
}

impl SpectralSummary {
    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn real_kappa_sum(&self) -> f64 {
        self.kappas
            .iter()
            .zip(&self.real_mask)
            .filter(|&(_, &is_real)| is_real)
            .map(|(&k, _)| k)
            .sum::<f64>()
            + 0.0
    }

    pub fn nonreal_kappa_sq_sum(&self) -> f64 {
        self.kappas
            .iter()
            .zip(&self.real_mask)
            .filter(|&(_, &is_real)| !is_real)
            .map(|(&k, _)| k * k)
            .sum::<f64>()
            + 0.0
    }
}

fn deterministic_start(n: usize) -> DVector<C64> {
    let v = DVector::from_fn(n, |i, _| {
        C64::new(1.0 + 0.37 * ((i + 1) as f64).sin(), 0.0)
    });
    let norm = v.norm();
    v / C64::new(norm, 0.0)
}

/// One right eigenvector by inverse iteration with the (machine-precision)
/// eigenvalue as shift. Converges in one or two solves when eigenvalues are
/// simple; the separation precondition guarantees that here.
fn right_eigenvector(mc: &CMat, lambda: C64, scale: f64) -> Result<DVector<C64>, SpectralError> {
    let n = mc.nrows();
    let mut shifted = mc.clone();
    for i in 0..n {
        shifted[(i, i)] -= lambda;
    }
    let tol = 1e-9 * scale.max(1.0);
    let mut b = deterministic_start(n);
    let mut best: Option<(f64, DVector<C64>)> = None;
    for attempt in 0..3 {
        let lu = shifted.clone().lu();
        for _ in 0..4 {
            let x = match lu.solve(&b) {
                Some(x) => x,
                None => break,
            };
            let norm = x.norm();
            if !norm.is_finite() || norm == 0.0 {
                break;
            }
            let v = x / C64::new(norm, 0.0);
            let residual = (mc * &v - v.scale(1.0) * lambda).norm();
            if best.as_ref().map_or(true, |(r, _)| residual < *r) {
                best = Some((residual, v.clone()));
            }
            if residual <= tol {
                return Ok(v);
            }
            b = v;
        }
        // Singular LU or stalled: nudge the shift off the exact eigenvalue.
        let bump = f64::EPSILON * scale.max(1.0) * (attempt + 1) as f64 * 16.0;
        for i in 0..n {
            shifted[(i, i)] += C64::new(bump, bump);
        }
        b = deterministic_start(n);
    }
    match best {
        Some((residual, v)) if residual <= 1e-6 * scale.max(1.0) => Ok(v),
        Some((residual, _)) => Err(SpectralError::EigenvectorFailure { residual }),
        None => Err(SpectralError::EigenvectorFailure { residual: f64::NAN }),
    }
}

/// Decompose a real square matrix with distinct eigenvalues.
///
/// Refuses matrices whose eigenvalues are separated by less than
/// `1e3 * eps_machine * ||M||_F`: kappa is unbounded near a defective matrix
/// and the reported numbers would be meaningless.
pub fn eigen_decompose(m: &RMat, tau_real: f64) -> Result<SpectralSummary, SpectralError> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(SpectralError::NotSquare {
            rows: n,
            cols: m.ncols(),
        });
    }
    if n == 0 {
        return Err(SpectralError::TooSmall { min: 1, got: 0 });
    }
    ensure_finite_real(m).map_err(|_| SpectralError::NonFinite)?;
    let scale = m.norm();

    let mut eigenvalues = crate::linalg::real_matrix_eigenvalues(m)?;
    // Deterministic presentation order.
    eigenvalues.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());

    let threshold = 1e3 * f64::EPSILON * scale.max(f64::MIN_POSITIVE);
    let mut min_sep = f64::INFINITY;
    for i in 0..n {
        for j in i + 1..n {
            min_sep = min_sep.min((eigenvalues[i] - eigenvalues[j]).norm());
        }
    }
    if n > 1 && min_sep <= threshold {
        return Err(SpectralError::DefectiveOrClustered {
            sep: min_sep,
            threshold,
        });
    }

    let mc = to_complex(m);
    let mut right = CMat::zeros(n, n);
    let mut done = vec![false; n];
    for i in 0..n {
        if done[i] {
            continue;
        }
        let lam = eigenvalues[i];
        if lam.im > 0.0 {
            let v = right_eigenvector(&mc, lam, scale)?;
            right.set_column(i, &v);
            done[i] = true;
            // Mirror onto the conjugate partner; real input matrices have
            // exactly conjugate-symmetric spectra.
            let target = lam.conj();
            let mut best_j = None;
            let mut best_d = f64::INFINITY;
            for (j, &mu) in eigenvalues.iter().enumerate() {
                if !done[j] && mu.im < 0.0 {
                    let d = (mu - target).norm();
                    if d < best_d {
                        best_d = d;
                        best_j = Some(j);
                    }
                }
            }
            match best_j {
                Some(j) if best_d <= 1e-8 * scale.max(1.0) => {
                    let vc = v.map(|x| x.conj());
                    right.set_column(j, &vc);
                    done[j] = true;
                }
                _ => {}
            }
        } else if lam.im == 0.0 {
            let v = right_eigenvector(&mc, lam, scale)?;
            right.set_column(i, &v);
            done[i] = true;
        }
    }
    // Any leftover (unpaired negative-imaginary) eigenvalues.
    for i in 0..n {
        if !done[i] {
            let v = right_eigenvector(&mc, eigenvalues[i], scale)?;
            right.set_column(i, &v);
            done[i] = true;
        }
    }

    let left_rows = right
        .clone()
        .lu()
        .try_inverse()
        .ok_or(SpectralError::SingularEigenvectorMatrix)?;

    let mut kappas = Vec::with_capacity(n);
    for i in 0..n {
        let vn = right.column(i).norm();
        let wn = left_rows.row(i).norm();
        kappas.push(vn * wn);
    }

    // overlap[(i,j)] = (V^H V)_{j,i} * conj((W W^H)_{j,i})
    let g_right = right.adjoint() * &right;
    let g_left = &left_rows * left_rows.adjoint();
    let overlap = CMat::from_fn(n, n, |i, j| g_right[(j, i)] * g_left[(j, i)].conj());

    let real_mask: Vec<bool> = eigenvalues.iter().map(|l| l.im.abs() <= tau_real).collect();

    Ok(SpectralSummary {
        eigenvalues,
        right_vectors: right,
        left_rows,
        kappas,
        overlap,
        real_mask,
        tau_real,
    })
}

/// Upper bound on the eigenvector condition number kappa_V: the minimum of the
/// unit-column diagonalizer bound ||V|| ||V^{-1}|| and the Frobenius bound
/// sqrt(n * sum kappa_i^2). The true infimum over diagonalizers is not
/// computed (nonconvex).
pub fn kappa_v_upper(s: &SpectralSummary) -> f64 {
    let sv = singular_values_complex(&s.right_vectors);
    let smin = sv[sv.len() - 1];
    let unit_column = if smin > 0.0 { sv[0] / smin } else { f64::INFINITY };
    let frob = ((s.n() as f64) * s.kappas.iter().map(|k| k * k).sum::<f64>()).sqrt();
    unit_column.min(frob).max(1.0)
}

/// Minimum-gap statistics over the spectrum. Empty minimizations yield +inf.
#[derive(Debug, Clone, Serialize)]
pub struct GapStats {
    /// min over i != j of |lambda_i - lambda_j|
    pub gap: f64,
    /// the lexicographically smallest argmin pair for `gap`
    pub gap_pair: (usize, usize),
    /// same minimum restricted to pairs with at least one real eigenvalue
    pub gap_real: f64,
    /// min |Im lambda_i| over non-real eigenvalues
    pub im_min: f64,
    /// min over pairs with both |Im| >= delta
    pub gap_im_geq: f64,
    /// the delta used for `gap_im_geq`
    pub delta: f64,
}

pub fn gap_stats(s: &SpectralSummary, delta: f64) -> Result<GapStats, SpectralError> {
    let n = s.n();
    if n < 2 {
        return Err(SpectralError::TooSmall { min: 2, got: n });
    }
    let mut gap = f64::INFINITY;
    let mut gap_pair = (0, 0);
    let mut gap_real = f64::INFINITY;
    let mut gap_im_geq = f64::INFINITY;
    for i in 0..n {
        for j in i + 1..n {
            let d = (s.eigenvalues[i] - s.eigenvalues[j]).norm();
            if d < gap {
                gap = d;
                gap_pair = (i, j);
            }
            if s.real_mask[i] || s.real_mask[j] {
                gap_real = gap_real.min(d);
            }
            if s.eigenvalues[i].im.abs() >= delta && s.eigenvalues[j].im.abs() >= delta {
                gap_im_geq = gap_im_geq.min(d);
            }
        }
    }
    let im_min = s
        .eigenvalues
        .iter()
        .zip(&s.real_mask)
        .filter(|&(_, &is_real)| !is_real)
        .map(|(l, _)| l.im.abs())
        .fold(f64::INFINITY, f64::min);
    Ok(GapStats {
        gap,
        gap_pair,
        gap_real,
        im_min,
        gap_im_geq,
        delta,
    })
}

/// Real or complex input for operations that accept both.
#[derive(Debug, Clone)]
pub enum MatrixInput {
    Real(RMat),
    Complex(CMat),
}

impl MatrixInput {
    pub fn nrows(&self) -> usize {
        match self {
            MatrixInput::Real(m) => m.nrows(),
            MatrixInput::Complex(m) => m.nrows(),
        }
    }
}

/// Singular values, descending, of a real or complex matrix.
pub fn singular_values(m: &MatrixInput) -> Result<Vec<f64>, SpectralError> {
    match m {
        MatrixInput::Real(r) => {
            ensure_finite_real(r).map_err(|_| SpectralError::NonFinite)?;
            Ok(crate::linalg::singular_values_real(r))
        }
        MatrixInput::Complex(c) => {
            ensure_finite_complex(c).map_err(|_| SpectralError::NonFinite)?;
            Ok(singular_values_complex(c))
        }
    }
}

/// Outcome of the two-eigenvalue disk certificate at (z, r):
/// if at least two eigenvalues lie in the closed disk D(z, r) then
/// sigma_n(z - M) * sigma_{n-1}(z - M) <= r^2 must hold. A `holds == false`
/// result falsifies the certificate and should be treated as a finding.
#[derive(Debug, Clone, Serialize)]
pub struct CertificateReport {
    pub holds: bool,
    pub product: f64,
    pub count_in_disk: usize,
    pub r: f64,
}

pub fn gap_certificate_check(
    m: &MatrixInput,
    z: C64,
    r: f64,
) -> Result<CertificateReport, SpectralError> {
    assert!(r >= 0.0, "disk radius must be nonnegative");
    let (eigs, shifted) = match m {
        MatrixInput::Real(rm) => {
            ensure_finite_real(rm).map_err(|_| SpectralError::NonFinite)?;
            let eigs = crate::linalg::real_matrix_eigenvalues(rm)?;
            (eigs, shift_real(rm, z))
        }
        MatrixInput::Complex(cm) => {
            ensure_finite_complex(cm).map_err(|_| SpectralError::NonFinite)?;
            (complex_eigenvalues(cm)?, shift_complex(cm, z))
        }
    };
    let n = eigs.len();
    if n < 2 {
        return Err(SpectralError::TooSmall { min: 2, got: n });
    }
    // Slightly inflated membership radius: an eigenvalue computed a few ulps
    // outside a disk it mathematically belongs to must still be counted.
    let r_eff = r * (1.0 + 1e-12) + 1e-300;
    let count_in_disk = eigs.iter().filter(|l| (*l - z).norm() <= r_eff).count();
    let sv = singular_values_complex(&shifted);
    let product = sv[n - 1] * sv[n - 2];
    let holds = count_in_disk < 2 || product <= r * r * (1.0 + 1e-9) + 1e-30;
    Ok(CertificateReport {
        holds,
        product,
        count_in_disk,
        r,
    })
}
