//! Chart-level tensor calculus: metric evaluation, Christoffel symbols,
//! Riemann curvature, and curvature scalars restricted to a subspace.
//!
//! All derivatives are second-order central differences on chart coordinates;
//! no symbolic form of the metric is assumed.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::config::Tolerances;
use crate::error::{GeomError, Result};
use crate::linalg;
use crate::tensor::{ChristoffelSymbols, CurvatureTensor};

pub type MetricField = Arc<dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync>;
pub type DomainCheck = Arc<dyn Fn(&[f64]) -> bool + Send + Sync>;

/// A coordinate chart carrying a smooth metric field.
#[derive(Clone)]
pub struct MetricChart {
    pub dim: usize,
    pub name: String,
    metric: MetricField,
    domain: DomainCheck,
}

impl std::fmt::Debug for MetricChart {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MetricChart")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .finish()
    }
}

impl MetricChart {
    pub fn new(name: impl Into<String>, dim: usize, metric: MetricField) -> Self {
        Self { dim, name: name.into(), metric, domain: Arc::new(|_| true) }
    }

    pub fn with_domain(mut self, domain: DomainCheck) -> Self {
        self.domain = domain;
        self
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim && (self.domain)(x)
    }

    fn out_of_domain(&self, x: &[f64]) -> GeomError {
        GeomError::OutOfDomain { chart: self.name.clone(), point: x.to_vec() }
    }

    /// Evaluate the metric, checking the domain and symmetry invariant.
    pub fn metric_at(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        if !self.contains(x) {
            return Err(self.out_of_domain(x));
        }
        let g = (self.metric)(x);
        debug_assert_eq!(g.nrows(), self.dim);
        let dev = linalg::symmetry_deviation(&g);
        if dev > 1e-12 {
            return Err(GeomError::InvalidInput(format!(
                "metric of `{}` is asymmetric at {:?} (deviation {dev:.3e})",
                self.name, x
            )));
        }
        Ok(g)
    }

    /// Metric together with its inverse; fails on indefinite or
    /// ill-conditioned metrics.
    pub fn metric_with_inverse(
        &self,
        x: &[f64],
        tol: &Tolerances,
    ) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
        let g = self.metric_at(x)?;
        // positive definiteness gate
        let l = linalg::cholesky_with_pivot(&g, tol.chol_pivot).map_err(|_| {
            GeomError::SingularMetric {
                point: x.to_vec(),
                detail: "metric is not positive definite".into(),
            }
        })?;
        let cond = linalg::symmetric_condition(&g);
        if cond > tol.metric_condition_max {
            return Err(GeomError::SingularMetric {
                point: x.to_vec(),
                detail: format!("condition number {cond:.3e} above threshold"),
            });
        }
        let li = l
            .try_inverse()
            .ok_or_else(|| GeomError::SingularMetric { point: x.to_vec(), detail: "factor inversion failed".into() })?;
        let ginv = li.transpose() * li;
        Ok((g, ginv))
    }
}

/// Central-difference partials ∂_m g_{ij} at `x`, one matrix per direction m.
fn metric_partials(chart: &MetricChart, x: &[f64], step: f64) -> Result<Vec<DMatrix<f64>>> {
    let d = chart.dim;
    let mut out = Vec::with_capacity(d);
    let mut xp = x.to_vec();
    let mut xm = x.to_vec();
    for m in 0..d {
        xp[m] += step;
        xm[m] -= step;
        let gp = chart.metric_at(&xp)?;
        let gm = chart.metric_at(&xm)?;
        out.push((gp - gm) / (2.0 * step));
        xp[m] = x[m];
        xm[m] = x[m];
    }
    Ok(out)
}

/// Christoffel symbols of the second kind,
/// Γ^k_{ij} = ½ g^{kl} (∂_i g_{jl} + ∂_j g_{il} − ∂_l g_{ij}),
/// with metric partials taken by central differences of width `step`.
pub fn christoffel(
    chart: &MetricChart,
    x: &[f64],
    step: f64,
    tol: &Tolerances,
) -> Result<ChristoffelSymbols> {
    if step <= 0.0 {
        return Err(GeomError::InvalidInput("step must be positive".into()));
    }
    let d = chart.dim;
    let (_, ginv) = chart.metric_with_inverse(x, tol)?;
    let dg = metric_partials(chart, x, step)?;
    let mut gamma = ChristoffelSymbols::zeros(d);
    for k in 0..d {
        for i in 0..d {
            for j in i..d {
                let mut s = 0.0;
                for l in 0..d {
                    s += ginv[(k, l)] * (dg[i][(j, l)] + dg[j][(i, l)] - dg[l][(i, j)]);
                }
                let v = 0.5 * s;
                gamma.set(k, i, j, v);
                gamma.set(k, j, i, v);
            }
        }
    }
    Ok(gamma)
}

/// Fully lowered Riemann tensor assembled from Γ and its central-difference
/// derivatives:
/// R(∂i,∂j)∂k = ∂_i Γ^m_{jk} − ∂_j Γ^m_{ik} + Γ^m_{ip}Γ^p_{jk} − Γ^m_{jp}Γ^p_{ik},
/// then R_{ijkl} = g_{ml} R^m(∂i,∂j)∂k.
pub fn riemann(
    chart: &MetricChart,
    x: &[f64],
    step: f64,
    tol: &Tolerances,
) -> Result<CurvatureTensor> {
    let d = chart.dim;
    let g = chart.metric_at(x)?;
    let gamma = christoffel(chart, x, step, tol)?;
    // ∂_m Γ by differencing whole Christoffel evaluations
    let mut dgamma: Vec<ChristoffelSymbols> = Vec::with_capacity(d);
    let mut xp = x.to_vec();
    let mut xm = x.to_vec();
    for m in 0..d {
        xp[m] += step;
        xm[m] -= step;
        let gp = christoffel(chart, &xp, step, tol)?;
        let gm = christoffel(chart, &xm, step, tol)?;
        let mut dg = ChristoffelSymbols::zeros(d);
        for k in 0..d {
            for i in 0..d {
                for j in 0..d {
                    dg.set(k, i, j, (gp.get(k, i, j) - gm.get(k, i, j)) / (2.0 * step));
                }
            }
        }
        dgamma.push(dg);
        xp[m] = x[m];
        xm[m] = x[m];
    }
    let mut tensor = CurvatureTensor::zeros(d);
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                // R^m_{kij} components for this (i, j, k)
                let mut up = vec![0.0; d];
                for (m, slot) in up.iter_mut().enumerate() {
                    let mut v = dgamma[i].get(m, j, k) - dgamma[j].get(m, i, k);
                    for p in 0..d {
                        v += gamma.get(m, i, p) * gamma.get(p, j, k)
                            - gamma.get(m, j, p) * gamma.get(p, i, k);
                    }
                    *slot = v;
                }
                for l in 0..d {
                    let mut low = 0.0;
                    for (m, v) in up.iter().enumerate() {
                        low += g[(m, l)] * v;
                    }
                    tensor.set(i, j, k, l, low);
                }
            }
        }
    }
    Ok(tensor)
}

/// Sectional curvature of the plane spanned by u and v:
/// K = R(u,v,v,u) / (g(u,u) g(v,v) − g(u,v)²).
pub fn sectional_curvature(
    r: &CurvatureTensor,
    g: &DMatrix<f64>,
    u: &DVector<f64>,
    v: &DVector<f64>,
    tol: &Tolerances,
) -> Result<f64> {
    let guu = linalg::metric_dot(g, u, u);
    let gvv = linalg::metric_dot(g, v, v);
    let guv = linalg::metric_dot(g, u, v);
    let gram = guu * gvv - guv * guv;
    if gram <= tol.degenerate_plane_tol {
        return Err(GeomError::DegeneratePlane { gram });
    }
    Ok(r.contract4(u, v, v, u) / gram)
}

/// Doubled scalar curvature of the subspace spanned by an orthonormal frame:
/// 2ρ = Σ_{i,j} R(e_i, e_j, e_j, e_i).
///
/// The doubling matches the convention in which the scalar curvature symbol
/// always appears as 2ρ; callers wanting ρ divide by two.
pub fn scalar_curvature_on_subspace(
    r: &CurvatureTensor,
    g: &DMatrix<f64>,
    frame: &[DVector<f64>],
    tol: &Tolerances,
) -> Result<f64> {
    let dev = linalg::gram_deviation(g, frame);
    if dev > tol.frame_ortho_tol {
        return Err(GeomError::NonOrthonormalFrame { deviation: dev });
    }
    let restricted = r.restrict(frame);
    Ok(doubled_scalar_from_restricted(&restricted))
}

/// 2ρ from a tensor already expressed in an orthonormal frame.
pub fn doubled_scalar_from_restricted(restricted: &CurvatureTensor) -> f64 {
    let n = restricted.dim;
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += restricted.get(i, j, j, i);
        }
    }
    s
}

// ---------------------------------------------------------------------------
// Built-in chart geometries
// ---------------------------------------------------------------------------

/// Flat Euclidean chart: g = identity.
pub fn euclidean(dim: usize) -> MetricChart {
    MetricChart::new(format!("euclidean_r{dim}"), dim, Arc::new(move |_x| DMatrix::identity(dim, dim)))
}

/// Stereographic chart of the constant-curvature-c space form:
/// g_ij = 4 δ_ij / (1 + c|x|²)².
///
/// c > 0 covers the sphere minus a pole; c < 0 the ball |x|² < −1/c of the
/// hyperbolic space; c = 0 is flat (conformal factor 4).
pub fn sphere_stereographic(dim: usize, c: f64) -> MetricChart {
    let metric: MetricField = Arc::new(move |x: &[f64]| {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        let w = 1.0 + c * r2;
        DMatrix::identity(dim, dim) * (4.0 / (w * w))
    });
    let domain: DomainCheck = Arc::new(move |x: &[f64]| {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        1.0 + c * r2 > 0.05
    });
    MetricChart::new(format!("sphere_c{c}_r{dim}"), dim, metric).with_domain(domain)
}

/// Complex-projective-space affine chart with holomorphic sectional
/// curvature 4c, real dimension 2s. Coordinates interleave real and
/// imaginary parts: z_a = x_{2a} + i x_{2a+1}.
pub fn fubini_study(s: usize, c: f64) -> MetricChart {
    assert!(c > 0.0, "holomorphic sectional curvature 4c requires c > 0");
    let dim = 2 * s;
    let metric: MetricField = Arc::new(move |x: &[f64]| {
        let z: Vec<Complex64> =
            (0..s).map(|a| Complex64::new(x[2 * a], x[2 * a + 1])).collect();
        let norm2: f64 = z.iter().map(|v| v.norm_sqr()).sum();
        let w = 1.0 + norm2;
        // Hermitian matrix H_ab = [(1+|z|²) δ_ab − conj(z_a) z_b] / (1+|z|²)²
        let mut g = DMatrix::zeros(dim, dim);
        for a in 0..s {
            for b in 0..s {
                let delta = if a == b { Complex64::new(w, 0.0) } else { Complex64::new(0.0, 0.0) };
                let h = (delta - z[a].conj() * z[b]) / (w * w) / c;
                // real representation of the Hermitian form
                g[(2 * a, 2 * b)] = h.re;
                g[(2 * a + 1, 2 * b + 1)] = h.re;
                g[(2 * a, 2 * b + 1)] = h.im;
                g[(2 * a + 1, 2 * b)] = -h.im;
            }
        }
        g
    });
    MetricChart::new(format!("cp{s}_hol4c_{c}"), dim, metric)
}

/// Polar-coordinate chart of the flat plane, g = diag(1, x₁²), valid for x₁ > 0.
pub fn polar_plane() -> MetricChart {
    let metric: MetricField = Arc::new(|x: &[f64]| {
        DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, x[0] * x[0]]))
    });
    let domain: DomainCheck = Arc::new(|x: &[f64]| x[0] > 0.05);
    MetricChart::new("polar_plane", 2, metric).with_domain(domain)
}

/// Spherical polar coordinates of flat R³, g = diag(1, x₁², x₁² sin²x₂).
pub fn spherical_polar_r3() -> MetricChart {
    let metric: MetricField = Arc::new(|x: &[f64]| {
        let r = x[0];
        let st = x[1].sin();
        DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, r * r, r * r * st * st]))
    });
    let domain: DomainCheck = Arc::new(|x: &[f64]| x[0] > 0.05 && x[1] > 0.05 && x[1] < std::f64::consts::PI - 0.05);
    MetricChart::new("spherical_polar_r3", 3, metric).with_domain(domain)
}

/// Product chart S²(1) × ℝ: block metric diag(round 2-sphere, 1).
pub fn product_s2xr() -> MetricChart {
    let metric: MetricField = Arc::new(|x: &[f64]| {
        let r2 = x[0] * x[0] + x[1] * x[1];
        let w = 1.0 + r2;
        let f = 4.0 / (w * w);
        DMatrix::from_diagonal(&DVector::from_vec(vec![f, f, 1.0]))
    });
    MetricChart::new("product_s2xr", 3, metric)
}

/// Graph chart of the upper unit hemisphere in R³: the pullback metric
/// I + x xᵀ / (1 − |x|²) of the embedding (x, y) ↦ (x, y, √(1−|x|²)).
pub fn sphere_graph_chart() -> MetricChart {
    let metric: MetricField = Arc::new(|x: &[f64]| {
        let r2 = x[0] * x[0] + x[1] * x[1];
        let f2 = 1.0 - r2;
        let mut g = DMatrix::identity(2, 2);
        for i in 0..2 {
            for j in 0..2 {
                g[(i, j)] += x[i] * x[j] / f2;
            }
        }
        g
    });
    let domain: DomainCheck = Arc::new(|x: &[f64]| x[0] * x[0] + x[1] * x[1] < 0.8);
    MetricChart::new("sphere_graph", 2, metric).with_domain(domain)
}

/// Source chart for a graph immersion x ↦ (x, f_1(x), …, f_q(x)) into flat
/// space: the pullback metric I + Σ_k ∇f_k ∇f_kᵀ for quadrics f_k = ½ xᵀA_k x.
pub fn graph_source_chart(dim: usize, quadrics: Vec<DMatrix<f64>>) -> MetricChart {
    let metric: MetricField = Arc::new(move |x: &[f64]| {
        let xv = DVector::from_column_slice(x);
        let mut g = DMatrix::identity(dim, dim);
        for a in &quadrics {
            let grad = a * &xv;
            g += &grad * grad.transpose();
        }
        g
    });
    MetricChart::new(format!("graph_quadric_r{dim}"), dim, metric)
}
