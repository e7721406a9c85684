//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};

use crate::error::{GeomError, Result};

/// Max-abs deviation of `m` from its transpose.
pub fn symmetry_deviation(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let mut dev: f64 = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            dev = dev.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    dev
}

/// Cholesky factorization with an explicit pivot threshold.
///
/// Returns the lower factor `L` with `m = L Lᵀ`, or an error if any pivot
/// falls below `pivot_tol` times the largest diagonal entry (the matrix is
/// then not usefully positive definite).
pub fn cholesky_with_pivot(m: &DMatrix<f64>, pivot_tol: f64) -> Result<DMatrix<f64>> {
    let n = m.nrows();
    let max_diag = (0..n).map(|i| m[(i, i)].abs()).fold(0.0f64, f64::max).max(1.0);
    let floor = pivot_tol * max_diag;
    let mut l = DMatrix::zeros(n, n);
    for j in 0..n {
        let mut d = m[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if d <= floor {
            return Err(GeomError::SingularMetric {
                point: vec![],
                detail: format!("Cholesky pivot {d:.3e} at column {j} below threshold {floor:.3e}"),
            });
        }
        let dj = d.sqrt();
        l[(j, j)] = dj;
        for i in (j + 1)..n {
            let mut s = m[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / dj;
        }
    }
    Ok(l)
}

/// Condition number estimate of a symmetric matrix via its eigenvalues.
pub fn symmetric_condition(m: &DMatrix<f64>) -> f64 {
    let eig = m.clone().symmetric_eigen();
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for &v in eig.eigenvalues.iter() {
        let a = v.abs();
        lo = lo.min(a);
        hi = hi.max(a);
    }
    if lo == 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

/// Inner product u·g·v.
pub fn metric_dot(g: &DMatrix<f64>, u: &DVector<f64>, v: &DVector<f64>) -> f64 {
    (u.transpose() * g * v)[(0, 0)]
}

pub fn metric_norm(g: &DMatrix<f64>, u: &DVector<f64>) -> f64 {
    metric_dot(g, u, u).max(0.0).sqrt()
}

/// Modified Gram–Schmidt in the inner product defined by `g`.
///
/// Vectors whose residual norm drops below `drop_tol` are skipped, so the
/// output may be shorter than the input.
pub fn gram_schmidt(g: &DMatrix<f64>, vectors: &[DVector<f64>], drop_tol: f64) -> Vec<DVector<f64>> {
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(vectors.len());
    for v in vectors {
        let mut w = v.clone();
        for b in &basis {
            let c = metric_dot(g, &w, b);
            w -= b * c;
        }
        // second pass for numerical orthogonality
        for b in &basis {
            let c = metric_dot(g, &w, b);
            w -= b * c;
        }
        let n = metric_norm(g, &w);
        if n > drop_tol {
            basis.push(w / n);
        }
    }
    basis
}

/// Extend `basis` (assumed g-orthonormal) to a full g-orthonormal basis of
/// the n-dimensional space, drawing candidates from `candidates` by largest
/// residual first (ties broken by lowest index).
pub fn complete_basis(
    g: &DMatrix<f64>,
    basis: &[DVector<f64>],
    candidates: &[DVector<f64>],
) -> Vec<DVector<f64>> {
    let n = g.nrows();
    let mut full: Vec<DVector<f64>> = basis.to_vec();
    let mut extension: Vec<DVector<f64>> = Vec::new();
    while full.len() < n {
        let mut best: Option<(usize, f64)> = None;
        for (idx, cand) in candidates.iter().enumerate() {
            let mut w = cand.clone();
            for b in &full {
                let c = metric_dot(g, &w, b);
                w -= b * c;
            }
            let res = metric_norm(g, &w);
            if best.map_or(true, |(_, b)| res > b + 1e-15) {
                best = Some((idx, res));
            }
        }
        let (idx, _) = best.expect("candidate list exhausted before basis completion");
        let mut w = candidates[idx].clone();
        for _ in 0..2 {
            for b in &full {
                let c = metric_dot(g, &w, b);
                w -= b * c;
            }
        }
        let nw = metric_norm(g, &w);
        let w = w / nw;
        full.push(w.clone());
        extension.push(w);
    }
    extension
}

/// Max deviation of the g-Gram matrix of `frame` from the identity.
pub fn gram_deviation(g: &DMatrix<f64>, frame: &[DVector<f64>]) -> f64 {
    let mut dev: f64 = 0.0;
    for (i, u) in frame.iter().enumerate() {
        for (j, v) in frame.iter().enumerate() {
            let target = if i == j { 1.0 } else { 0.0 };
            dev = dev.max((metric_dot(g, u, v) - target).abs());
        }
    }
    dev
}

/// Orthonormal completion of the pair (u, v) to a basis of R^r (Euclidean),
/// with u, v as the first two columns. Used to adapt frames to a plane.
pub fn complete_pair_euclidean(u: &DVector<f64>, v: &DVector<f64>) -> DMatrix<f64> {
    let r = u.len();
    let id = DMatrix::<f64>::identity(r, r);
    let mut cols: Vec<DVector<f64>> = vec![u.clone(), v.clone()];
    let eye = DMatrix::<f64>::identity(r, r);
    let cands: Vec<DVector<f64>> = (0..r).map(|k| eye.column(k).into_owned()).collect();
    let ext = complete_basis(&id, &cols, &cands);
    cols.extend(ext);
    DMatrix::from_columns(&cols.iter().map(|c| c.column(0)).collect::<Vec<_>>())
}
