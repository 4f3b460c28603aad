//! Restricted invertibility: every PSD matrix has a k x k principal submatrix
//! whose smallest eigenvalue is within an explicit factor of lambda_k, and
//! every tall matrix has k rows witnessing a comparable sigma_k. Exhaustive
//! enumeration certifies the bounds; greedy pivoted selection scales past
//! where enumeration explodes (no optimality claim there).

use crate::linalg::{ensure_finite_real, RMat};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SubmatrixError {
    #[error("matrix is not positive semidefinite: min eigenvalue {min_eig:.3e}")]
    NotPsd { min_eig: f64 },
    #[error("exhaustive enumeration infeasible: C({n},{k}) = {count} > {limit}")]
    TooManySubsets { n: usize, k: usize, count: u128, limit: u128 },
    #[error("k must satisfy 1 <= k <= {n}, got {k}")]
    BadK { n: usize, k: usize },
    #[error("need n >= k rows, got {n} rows for k = {k}")]
    TooFewRows { n: usize, k: usize },
    #[error("interlacing violated on subset {subset:?}: {sub:.6e} > {full:.6e}")]
    InterlacingViolation { subset: Vec<usize>, sub: f64, full: f64 },
    #[error(transparent)]
    LinAlg(#[from] crate::linalg::LinAlgError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionMode {
    Exhaustive,
    Greedy,
}

#[derive(Debug, Clone, Serialize)]
pub struct SubmatrixResult {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    /// lambda_k(X_{S,S}) or sigma_k(Q) of the selected submatrix
    pub value: f64,
    /// the guaranteed lower bound witnessed by some subset
    pub bound: f64,
    pub mode: SelectionMode,
}

const SUBSET_LIMIT: u128 = 1_000_000;

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Lexicographic k-subsets of {0, .., n-1}.
fn for_each_subset<F: FnMut(&[usize]) -> Result<(), SubmatrixError>>(
    n: usize,
    k: usize,
    mut f: F,
) -> Result<(), SubmatrixError> {
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx)?;
        // advance
        let mut i = k;
        loop {
            if i == 0 {
                return Ok(());
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 {
                return Ok(());
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

fn principal_submatrix(x: &RMat, s: &[usize]) -> RMat {
    RMat::from_fn(s.len(), s.len(), |i, j| x[(s[i], s[j])])
}

fn symmetric_eigenvalues_desc(x: &RMat) -> Vec<f64> {
    crate::linalg::symmetric_eigenvalues(x)
}

/// Maximize lambda_k over principal k x k submatrices of a PSD matrix.
///
/// The bound field carries the guaranteed value
/// (Tr X / sum_{i<=k} lambda_i) * lambda_k / (k (n-k+1)); exhaustive results
/// always satisfy value >= bound.
pub fn best_principal_submatrix(
    x: &RMat,
    k: usize,
    mode: SelectionMode,
) -> Result<SubmatrixResult, SubmatrixError> {
    ensure_finite_real(x)?;
    let n = x.nrows();
    if k == 0 || k > n {
        return Err(SubmatrixError::BadK { n, k });
    }
    let sym = (x + x.transpose()) * 0.5;
    let eigs = symmetric_eigenvalues_desc(&sym);
    let min_eig = *eigs.last().unwrap();
    if min_eig < -1e-10 * eigs[0].abs().max(1.0) {
        return Err(SubmatrixError::NotPsd { min_eig });
    }
    let eigs: Vec<f64> = eigs.into_iter().map(|e| e.max(0.0)).collect();
    let trace: f64 = eigs.iter().sum();
    let top_k: f64 = eigs.iter().take(k).sum();
    let bound = if top_k > 0.0 {
        (trace / top_k) * eigs[k - 1] / (k * (n - k + 1)) as f64
    } else {
        0.0
    };
    let lambda_k_full = eigs[k - 1];

    match mode {
        SelectionMode::Exhaustive => {
            let count = binomial(n, k);
            if count > SUBSET_LIMIT {
                return Err(SubmatrixError::TooManySubsets {
                    n,
                    k,
                    count,
                    limit: SUBSET_LIMIT,
                });
            }
            let mut best_val = f64::NEG_INFINITY;
            let mut best_s: Vec<usize> = vec![];
            let interlace_slack = 1e-9 * lambda_k_full.max(1.0);
            for_each_subset(n, k, |s| {
                let sub = principal_submatrix(&sym, s);
                let sub_eigs = symmetric_eigenvalues_desc(&sub);
                let lam_k = sub_eigs[k - 1];
                if lam_k > lambda_k_full + interlace_slack {
                    return Err(SubmatrixError::InterlacingViolation {
                        subset: s.to_vec(),
                        sub: lam_k,
                        full: lambda_k_full,
                    });
                }
                if lam_k > best_val {
                    best_val = lam_k;
                    best_s = s.to_vec();
                }
                Ok(())
            })?;
            Ok(SubmatrixResult {
                rows: best_s.clone(),
                cols: best_s,
                value: best_val,
                bound,
                mode,
            })
        }
        SelectionMode::Greedy => {
            // Pivoted partial Cholesky: repeatedly take the largest Schur
            // complement diagonal.
            let mut work = sym.clone();
            let mut chosen: Vec<usize> = Vec::with_capacity(k);
            let mut available: Vec<usize> = (0..n).collect();
            for _ in 0..k {
                let (&pivot, _) = available
                    .iter()
                    .zip(available.iter().map(|&i| work[(i, i)]))
                    .fold(None::<(&usize, f64)>, |acc, (i, d)| match acc {
                        Some((bi, bd)) if bd >= d => Some((bi, bd)),
                        _ => Some((i, d)),
                    })
                    .unwrap();
                chosen.push(pivot);
                available.retain(|&i| i != pivot);
                let d = work[(pivot, pivot)];
                if d > 1e-14 {
                    let col = work.column(pivot).clone_owned();
                    for &i in &available {
                        for &j in &available {
                            let upd = col[i] * col[j] / d;
                            work[(i, j)] -= upd;
                        }
                    }
                }
            }
            chosen.sort_unstable();
            let sub = principal_submatrix(&sym, &chosen);
            let value = symmetric_eigenvalues_desc(&sub)[k - 1];
            Ok(SubmatrixResult {
                rows: chosen.clone(),
                cols: chosen,
                value,
                bound,
                mode,
            })
        }
    }
}

fn row_submatrix(r: &RMat, s: &[usize]) -> RMat {
    RMat::from_fn(s.len(), r.ncols(), |i, j| r[(s[i], j)])
}

/// Pick k rows of an n x k matrix maximizing sigma_k of the square selection;
/// exhaustive results satisfy sigma_k(Q) >= sigma_k(R) / sqrt(k (n-k+1)).
pub fn best_rectangular_submatrix(
    r: &RMat,
    mode: SelectionMode,
) -> Result<SubmatrixResult, SubmatrixError> {
    ensure_finite_real(r)?;
    let n = r.nrows();
    let k = r.ncols();
    if k == 0 || n < k {
        return Err(SubmatrixError::TooFewRows { n, k });
    }
    let sv_full = crate::linalg::singular_values_real(r);
    let sigma_k_full = sv_full[k - 1];
    let bound = sigma_k_full / ((k * (n - k + 1)) as f64).sqrt();

    match mode {
        SelectionMode::Exhaustive => {
            let count = binomial(n, k);
            if count > SUBSET_LIMIT {
                return Err(SubmatrixError::TooManySubsets {
                    n,
                    k,
                    count,
                    limit: SUBSET_LIMIT,
                });
            }
            let mut best_val = f64::NEG_INFINITY;
            let mut best_s: Vec<usize> = vec![];
            for_each_subset(n, k, |s| {
                let q = row_submatrix(r, s);
                let sv = crate::linalg::singular_values_real(&q);
                let sk = sv[k - 1];
                if sk > best_val {
                    best_val = sk;
                    best_s = s.to_vec();
                }
                Ok(())
            })?;
            Ok(SubmatrixResult {
                rows: best_s,
                cols: (0..k).collect(),
                value: best_val,
                bound,
                mode,
            })
        }
        SelectionMode::Greedy => {
            // Column-pivoted Gram-Schmidt on R^T: selects rows of R with the
            // largest residual norms.
            let mut residual: Vec<nalgebra::DVector<f64>> =
                (0..n).map(|i| r.row(i).transpose().clone_owned()).collect();
            let mut chosen: Vec<usize> = Vec::with_capacity(k);
            let mut available: Vec<usize> = (0..n).collect();
            let mut basis: Vec<nalgebra::DVector<f64>> = Vec::with_capacity(k);
            for _ in 0..k {
                let &pivot = available
                    .iter()
                    .max_by(|&&a, &&b| {
                        residual[a]
                            .norm()
                            .partial_cmp(&residual[b].norm())
                            .unwrap()
                            .then(b.cmp(&a))
                    })
                    .unwrap();
                chosen.push(pivot);
                available.retain(|&i| i != pivot);
                let nrm = residual[pivot].norm();
                if nrm > 1e-14 {
                    let q = &residual[pivot] / nrm;
                    for &i in &available {
                        let proj = residual[i].dot(&q);
                        residual[i] -= &q * proj;
                    }
                    basis.push(q);
                }
            }
            chosen.sort_unstable();
            let q = row_submatrix(r, &chosen);
            let sv = crate::linalg::singular_values_real(&q);
            Ok(SubmatrixResult {
                rows: chosen,
                cols: (0..k).collect(),
                value: sv[k - 1],
                bound,
                mode,
            })
        }
    }
}
