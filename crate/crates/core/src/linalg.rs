//! Shared dense linear algebra helpers on top of nalgebra: singular value
//! wrappers, complex shifts, a complex Hessenberg-QR eigenvalue solver, and
//! order-insensitive summation.

use nalgebra::{Complex, DMatrix};
use thiserror::Error;

pub type C64 = Complex<f64>;
pub type RMat = DMatrix<f64>;
pub type CMat = DMatrix<C64>;

#[derive(Debug, Error)]
pub enum LinAlgError {
    #[error("matrix contains non-finite entries")]
    NonFinite,
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("QR eigenvalue iteration failed to converge after {0} sweeps")]
    NoConvergence(usize),
    #[error("matrix is singular")]
    Singular,
}

pub fn ensure_finite_real(m: &RMat) -> Result<(), LinAlgError> {
    if m.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(LinAlgError::NonFinite)
    }
}

pub fn ensure_finite_complex(m: &CMat) -> Result<(), LinAlgError> {
    if m.iter().all(|x| x.re.is_finite() && x.im.is_finite()) {
        Ok(())
    } else {
        Err(LinAlgError::NonFinite)
    }
}

pub fn to_complex(m: &RMat) -> CMat {
    m.map(|x| C64::new(x, 0.0))
}

/// `z*I - M` for a real matrix and complex shift.
pub fn shift_real(m: &RMat, z: C64) -> CMat {
    let n = m.nrows();
    let mut s = m.map(|x| C64::new(-x, 0.0));
    for i in 0..n {
        s[(i, i)] += z;
    }
    s
}

/// `z*I - M` for a complex matrix.
pub fn shift_complex(m: &CMat, z: C64) -> CMat {
    let n = m.nrows();
    let mut s = m.map(|x| -x);
    for i in 0..n {
        s[(i, i)] += z;
    }
    s
}

/// nalgebra's default `svd()`/`symmetric_eigen()` iterate without a cap and
/// can spin forever on rare inputs; everything here goes through capped
/// `try_*` calls with a guaranteed-terminating Jacobi fallback.
const SVD_MAX_ITER: usize = 10_000;

/// Eigenvalues of a symmetric real matrix, descending. Cyclic Jacobi: slower
/// than tridiagonal QL but unconditionally convergent.
pub fn jacobi_symmetric_eigenvalues(a: &RMat) -> Vec<f64> {
    let n = a.nrows();
    let mut m = (a + a.transpose()) * 0.5;
    let scale = m.norm().max(1e-300);
    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                off += m[(i, j)] * m[(i, j)];
            }
        }
        if off.sqrt() <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (theta * theta + 1.0).sqrt())
                } else {
                    1.0 / (theta - (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = m[(k, p)];
                    let akq = m[(k, q)];
                    m[(k, p)] = c * akp - s * akq;
                    m[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = m[(p, k)];
                    let aqk = m[(q, k)];
                    m[(p, k)] = c * apk - s * aqk;
                    m[(q, k)] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| m[(i, i)]).collect();
    ev.sort_by(|a, b| b.partial_cmp(a).expect("finite eigenvalues"));
    ev
}

/// Eigenvalues of a symmetric real matrix, descending.
pub fn symmetric_eigenvalues(a: &RMat) -> Vec<f64> {
    let sym = (a + a.transpose()) * 0.5;
    match sym.clone().try_symmetric_eigen(f64::EPSILON, SVD_MAX_ITER) {
        Some(se) => {
            let mut ev: Vec<f64> = se.eigenvalues.iter().cloned().collect();
            ev.sort_by(|a, b| b.partial_cmp(a).expect("finite eigenvalues"));
            ev
        }
        None => jacobi_symmetric_eigenvalues(&sym),
    }
}

fn sorted_desc(mut sv: Vec<f64>) -> Vec<f64> {
    sv.sort_by(|a, b| b.partial_cmp(a).expect("singular values are finite"));
    sv
}

/// Singular values of a real matrix, descending.
pub fn singular_values_real(m: &RMat) -> Vec<f64> {
    match m.clone().try_svd(false, false, f64::EPSILON, SVD_MAX_ITER) {
        Some(svd) => sorted_desc(svd.singular_values.iter().cloned().collect()),
        None => {
            // Gram fallback: sigma = sqrt(eig(M^T M)); costs half the digits
            // near zero but cannot fail.
            let gram = m.transpose() * m;
            jacobi_symmetric_eigenvalues(&gram)
                .into_iter()
                .map(|l| l.max(0.0).sqrt())
                .collect()
        }
    }
}

/// Singular values of a complex matrix, descending.
pub fn singular_values_complex(m: &CMat) -> Vec<f64> {
    match m.clone().try_svd(false, false, f64::EPSILON, SVD_MAX_ITER) {
        Some(svd) => sorted_desc(svd.singular_values.iter().cloned().collect()),
        None => {
            // Embed into the real 2n x 2n representation: its singular value
            // multiset is that of M doubled.
            let (r, c) = (m.nrows(), m.ncols());
            let mut e = RMat::zeros(2 * r, 2 * c);
            for i in 0..r {
                for j in 0..c {
                    e[(i, j)] = m[(i, j)].re;
                    e[(i, c + j)] = -m[(i, j)].im;
                    e[(r + i, j)] = m[(i, j)].im;
                    e[(r + i, c + j)] = m[(i, j)].re;
                }
            }
            let gram = e.transpose() * &e;
            let doubled: Vec<f64> = jacobi_symmetric_eigenvalues(&gram)
                .into_iter()
                .map(|l| l.max(0.0).sqrt())
                .collect();
            doubled.into_iter().step_by(2).collect()
        }
    }
}

pub fn sigma_min_real(m: &RMat) -> f64 {
    *singular_values_real(m).last().expect("nonempty matrix")
}

pub fn sigma_min_complex(m: &CMat) -> f64 {
    *singular_values_complex(m).last().expect("nonempty matrix")
}

/// Spectral norm (largest singular value).
pub fn op_norm_real(m: &RMat) -> f64 {
    singular_values_real(m)[0]
}

/// Pairwise (cascade) summation. Deterministic for a fixed input order and
/// more accurate than a running sum on long Monte Carlo accumulations.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 32 {
        let mut s = 0.0;
        for &x in xs {
            s += x;
        }
        return s;
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

pub fn mean(xs: &[f64]) -> f64 {
    pairwise_sum(xs) / xs.len() as f64
}

/// Sample standard error of the mean.
pub fn stderr_of_mean(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return f64::NAN;
    }
    let m = mean(xs);
    let dev: Vec<f64> = xs.iter().map(|x| (x - m) * (x - m)).collect();
    (pairwise_sum(&dev) / ((n - 1) as f64) / n as f64).sqrt()
}

// ---------------------------------------------------------------------------
// Complex eigenvalues by Hessenberg reduction + shifted QR.
//
// nalgebra only provides a real Schur decomposition, so complex inputs (the
// shifted matrices of the gap certificate) get a small dedicated solver.
// ---------------------------------------------------------------------------

/// Complex Givens rotation: returns (c, s, r) with c real so that
/// [c s; -conj(s) c] * [f; g] = [r; 0].
fn zrotg(f: C64, g: C64) -> (f64, C64, C64) {
    let gn = g.norm();
    if gn == 0.0 {
        return (1.0, C64::new(0.0, 0.0), f);
    }
    let fn_ = f.norm();
    if fn_ == 0.0 {
        return (0.0, g.conj() / gn, C64::new(gn, 0.0));
    }
    let d = (fn_ * fn_ + gn * gn).sqrt();
    let c = fn_ / d;
    let fs = f / fn_;
    let s = fs * g.conj() / d;
    let r = fs * d;
    (c, s, r)
}

/// In-place Householder reduction to upper Hessenberg form.
fn hessenberg_in_place(h: &mut CMat) {
    let n = h.nrows();
    if n < 3 {
        return;
    }
    for j in 0..n - 2 {
        // Build reflector for column j below the subdiagonal.
        let mut x: Vec<C64> = (j + 1..n).map(|i| h[(i, j)]).collect();
        let xnorm = x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        if xnorm == 0.0 {
            continue;
        }
        let alpha = x[0];
        let phase = if alpha.norm() == 0.0 {
            C64::new(1.0, 0.0)
        } else {
            alpha / alpha.norm()
        };
        let beta = -phase * xnorm;
        x[0] -= beta;
        let vnorm_sqr: f64 = x.iter().map(|v| v.norm_sqr()).sum();
        if vnorm_sqr == 0.0 {
            continue;
        }
        // Apply P = I - 2 v v^* / (v^* v) from the left (rows j+1..) ...
        for col in j..n {
            let mut dot = C64::new(0.0, 0.0);
            for (idx, i) in (j + 1..n).enumerate() {
                dot += x[idx].conj() * h[(i, col)];
            }
            let scale = dot * (2.0 / vnorm_sqr);
            for (idx, i) in (j + 1..n).enumerate() {
                let upd = scale * x[idx];
                h[(i, col)] -= upd;
            }
        }
        // ... and from the right (columns j+1..).
        for row in 0..n {
            let mut dot = C64::new(0.0, 0.0);
            for (idx, i) in (j + 1..n).enumerate() {
                dot += h[(row, i)] * x[idx];
            }
            let scale = dot * (2.0 / vnorm_sqr);
            for (idx, i) in (j + 1..n).enumerate() {
                let upd = scale * x[idx].conj();
                h[(row, i)] -= upd;
            }
        }
        for i in j + 2..n {
            h[(i, j)] = C64::new(0.0, 0.0);
        }
        h[(j + 1, j)] = beta;
    }
}

/// Eigenvalues of the 2x2 complex block [[a, b], [c, d]].
fn eig2(a: C64, b: C64, c: C64, d: C64) -> (C64, C64) {
    let tr = (a + d) * 0.5;
    let det = a * d - b * c;
    let disc = (tr * tr - det).sqrt();
    (tr + disc, tr - disc)
}

/// Eigenvalues of a general complex square matrix via shifted QR iteration.
pub fn complex_eigenvalues(m: &CMat) -> Result<Vec<C64>, LinAlgError> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(LinAlgError::NotSquare {
            rows: n,
            cols: m.ncols(),
        });
    }
    ensure_finite_complex(m)?;
    if n == 0 {
        return Ok(vec![]);
    }
    if n == 1 {
        return Ok(vec![m[(0, 0)]]);
    }
    let mut h = m.clone();
    hessenberg_in_place(&mut h);

    let scale = h.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1.0);
    let tiny = f64::EPSILON * scale;
    let mut eigs: Vec<C64> = Vec::with_capacity(n);
    let mut hi = n - 1;
    let max_sweeps = 60 * n;
    let mut sweeps = 0usize;
    let mut stagnant = 0usize;

    loop {
        // Zero negligible subdiagonals.
        for i in 0..hi {
            let thresh = f64::EPSILON * (h[(i, i)].norm() + h[(i + 1, i + 1)].norm()).max(tiny);
            if h[(i + 1, i)].norm() <= thresh {
                h[(i + 1, i)] = C64::new(0.0, 0.0);
            }
        }
        // Deflate converged trailing eigenvalues.
        while hi > 0 && h[(hi, hi - 1)].norm() == 0.0 {
            eigs.push(h[(hi, hi)]);
            hi -= 1;
            stagnant = 0;
        }
        if hi == 0 {
            eigs.push(h[(0, 0)]);
            break;
        }
        if hi == 1 && h[(1, 0)].norm() != 0.0 {
            let (l1, l2) = eig2(h[(0, 0)], h[(0, 1)], h[(1, 0)], h[(1, 1)]);
            eigs.push(l2);
            eigs.push(l1);
            break;
        }
        // Active block [lo, hi].
        let mut lo = hi;
        while lo > 0 && h[(lo, lo - 1)].norm() != 0.0 {
            lo -= 1;
        }
        if hi - lo == 1 {
            // Isolated 2x2 block: take its eigenvalues directly.
            let (l1, l2) = eig2(h[(lo, lo)], h[(lo, hi)], h[(hi, lo)], h[(hi, hi)]);
            eigs.push(l2);
            eigs.push(l1);
            if lo == 0 {
                break;
            }
            hi = lo - 1;
            stagnant = 0;
            continue;
        }

        sweeps += 1;
        stagnant += 1;
        if sweeps > max_sweeps {
            return Err(LinAlgError::NoConvergence(max_sweeps));
        }
        // Wilkinson shift from the trailing 2x2, or an exceptional shift if
        // the iteration is stalling.
        let mu = if stagnant % 12 == 0 {
            h[(hi, hi)] + C64::new(1.5 * h[(hi, hi - 1)].norm(), 0.5 * h[(hi, hi - 1)].norm())
        } else {
            let (l1, l2) = eig2(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)]);
            let target = h[(hi, hi)];
            if (l1 - target).norm() <= (l2 - target).norm() {
                l1
            } else {
                l2
            }
        };

        // Explicit shifted QR step on the active block, with coupling blocks
        // updated so the full matrix stays similar to the input.
        for i in lo..=hi {
            h[(i, i)] -= mu;
        }
        let mut rots: Vec<(f64, C64)> = Vec::with_capacity(hi - lo);
        for i in lo..hi {
            let (c, s, r) = zrotg(h[(i, i)], h[(i + 1, i)]);
            h[(i, i)] = r;
            h[(i + 1, i)] = C64::new(0.0, 0.0);
            for j in i + 1..n {
                let a = h[(i, j)];
                let b = h[(i + 1, j)];
                h[(i, j)] = c * a + s * b;
                h[(i + 1, j)] = -s.conj() * a + c * b;
            }
            rots.push((c, s));
        }
        for (idx, &(c, s)) in rots.iter().enumerate() {
            let j = lo + idx;
            for r in 0..=(j + 1).min(hi) {
                let a = h[(r, j)];
                let b = h[(r, j + 1)];
                h[(r, j)] = c * a + s.conj() * b;
                h[(r, j + 1)] = -s * a + c * b;
            }
        }
        for i in lo..=hi {
            h[(i, i)] += mu;
        }
    }

    debug_assert_eq!(eigs.len(), n);
    Ok(eigs)
}

/// Eigenvalues of a real matrix: the complex QR solver on the complexified
/// input, followed by exact conjugate symmetrization of near-conjugate pairs
/// (real input matrices have conjugate-closed spectra; the iteration only
/// recovers that up to roundoff).
pub fn real_matrix_eigenvalues(m: &RMat) -> Result<Vec<C64>, LinAlgError> {
    if m.nrows() != m.ncols() {
        return Err(LinAlgError::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    ensure_finite_real(m)?;
    let mut eigs = complex_eigenvalues(&to_complex(m))?;
    let n = eigs.len();
    let tol = 1e-6 * m.norm().max(1.0);
    let mut paired = vec![false; n];
    for i in 0..n {
        if paired[i] || eigs[i].im <= 0.0 {
            continue;
        }
        let target = eigs[i].conj();
        let mut best: Option<(usize, f64)> = None;
        for (j, &mu) in eigs.iter().enumerate() {
            if j != i && !paired[j] && mu.im < 0.0 {
                let d = (mu - target).norm();
                if best.map_or(true, |(_, bd)| d < bd) {
                    best = Some((j, d));
                }
            }
        }
        if let Some((j, d)) = best {
            if d <= tol {
                let avg = (eigs[i] + eigs[j].conj()) * 0.5;
                eigs[i] = avg;
                eigs[j] = avg.conj();
                paired[i] = true;
                paired[j] = true;
            }
        }
    }
    // Lone eigenvalues whose imaginary part is iteration noise are real
    // eigenvalues of the real matrix: snap them onto the axis.
    let snap = 1e3 * f64::EPSILON * m.norm().max(f64::MIN_POSITIVE);
    for (i, e) in eigs.iter_mut().enumerate() {
        if !paired[i] && e.im != 0.0 && e.im.abs() <= snap {
            e.im = 0.0;
        }
    }
    Ok(eigs)
}
