//! Riemannian-map machinery at a point: the pushforward, the four canonical
//! subspaces, the second fundamental form, tension field, shape operators,
//! and the Gauss-equation residual.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::chart::{self, MetricChart};
use crate::config::Tolerances;
use crate::error::{GeomError, Result};
use crate::linalg;
use crate::tensor::CurvatureTensor;

pub type MapField = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// A smooth coordinate map between two charts.
#[derive(Clone)]
pub struct CoordinateMap {
    pub source_dim: usize,
    pub target_dim: usize,
    f: MapField,
}

impl CoordinateMap {
    pub fn new(source_dim: usize, target_dim: usize, f: MapField) -> Self {
        Self { source_dim, target_dim, f }
    }

    pub fn identity(dim: usize) -> Self {
        Self::new(dim, dim, Arc::new(|x: &[f64]| x.to_vec()))
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let y = (self.f)(x);
        debug_assert_eq!(y.len(), self.target_dim);
        y
    }

    /// Jacobian by central differences: an n×m matrix.
    pub fn jacobian(&self, x: &[f64], step: f64) -> DMatrix<f64> {
        let (m, n) = (self.source_dim, self.target_dim);
        let mut j = DMatrix::zeros(n, m);
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        for col in 0..m {
            xp[col] += step;
            xm[col] -= step;
            let yp = self.apply(&xp);
            let ym = self.apply(&xm);
            for row in 0..n {
                j[(row, col)] = (yp[row] - ym[row]) / (2.0 * step);
            }
            xp[col] = x[col];
            xm[col] = x[col];
        }
        j
    }
}

impl std::fmt::Debug for CoordinateMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CoordinateMap")
            .field("source_dim", &self.source_dim)
            .field("target_dim", &self.target_dim)
            .finish()
    }
}

/// A Riemannian-map candidate: source and target charts, the coordinate map,
/// and a base point.
#[derive(Debug, Clone)]
pub struct MapScenario {
    pub name: String,
    pub source: MetricChart,
    pub target: MetricChart,
    pub map: CoordinateMap,
    pub base_point: Vec<f64>,
    /// Minimum acceptable rank of the pushforward. The inequality modules
    /// require 3; plumbing scenarios may relax this down to 1.
    pub declared_rank_min: usize,
}

impl MapScenario {
    pub fn new(
        name: impl Into<String>,
        source: MetricChart,
        target: MetricChart,
        map: CoordinateMap,
        base_point: Vec<f64>,
    ) -> Self {
        Self { name: name.into(), source, target, map, base_point, declared_rank_min: 3 }
    }

    pub fn with_rank_min(mut self, r: usize) -> Self {
        self.declared_rank_min = r;
        self
    }
}

/// Orthonormal bases for the vertical space (ker dπ), the horizontal space
/// (its g1-complement), the range (im dπ) and its g2-complement, plus the raw
/// pushforward matrix.
#[derive(Debug, Clone)]
pub struct SplitFrames {
    pub pushforward: DMatrix<f64>,
    pub rank: usize,
    pub horizontal: Vec<DVector<f64>>,
    pub vertical: Vec<DVector<f64>>,
    pub range: Vec<DVector<f64>>,
    pub range_perp: Vec<DVector<f64>>,
    pub singular_values: Vec<f64>,
}

impl SplitFrames {
    /// Push a horizontal vector (given in chart coordinates) through dπ.
    pub fn push(&self, u: &DVector<f64>) -> DVector<f64> {
        &self.pushforward * u
    }

    /// Horizontal chart-coordinate vector from components in the horizontal frame.
    pub fn horizontal_from_coords(&self, coords: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.horizontal[0].len());
        for (c, h) in coords.iter().zip(self.horizontal.iter()) {
            out += h * *c;
        }
        out
    }

    /// Rotate the horizontal frame by an orthogonal matrix q (r×r), carrying
    /// the range frame along so that range[i] still tracks dπ(horizontal[i]).
    pub fn rotate_horizontal(&self, q: &DMatrix<f64>) -> SplitFrames {
        let r = self.rank;
        assert_eq!(q.nrows(), r);
        let mix = |frame: &[DVector<f64>]| -> Vec<DVector<f64>> {
            (0..r)
                .map(|new| {
                    let mut v = DVector::zeros(frame[0].len());
                    for old in 0..r {
                        v += &frame[old] * q[(old, new)];
                    }
                    v
                })
                .collect()
        };
        SplitFrames {
            pushforward: self.pushforward.clone(),
            rank: r,
            horizontal: mix(&self.horizontal),
            vertical: self.vertical.clone(),
            range: mix(&self.range),
            range_perp: self.range_perp.clone(),
            singular_values: self.singular_values.clone(),
        }
    }
}

/// Components B^k_{ij} of the second fundamental form against the
/// range-perpendicular frame: B^k_{ij} = g2((∇dπ)(h_i, h_j), V_k).
#[derive(Debug, Clone)]
pub struct SecondFundamentalForm {
    pub rank: usize,
    pub normal_count: usize,
    data: Vec<f64>,
    /// Max |B^k_{ij} − B^k_{ji}|.
    pub symmetry_residual: f64,
    /// Max g2-norm of the range-projected part of (∇dπ)(h_i, h_j); should be
    /// at noise level for a genuine Riemannian map.
    pub range_residual: f64,
}

impl SecondFundamentalForm {
    pub fn from_components(rank: usize, normal_count: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), normal_count * rank * rank);
        let mut sff = Self { rank, normal_count, data, symmetry_residual: 0.0, range_residual: 0.0 };
        sff.symmetry_residual = sff.compute_symmetry_residual();
        sff
    }

    fn compute_symmetry_residual(&self) -> f64 {
        let mut dev: f64 = 0.0;
        for k in 0..self.normal_count {
            for i in 0..self.rank {
                for j in (i + 1)..self.rank {
                    dev = dev.max((self.get(k, i, j) - self.get(k, j, i)).abs());
                }
            }
        }
        dev
    }

    #[inline]
    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.data[(k * self.rank + i) * self.rank + j]
    }

    /// Squared Frobenius norm Σ_{k,i,j} (B^k_{ij})², the quantity written
    /// ‖∇dπ‖² in the trace identity.
    pub fn norm_sq(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Re-express the form after a rotation of the horizontal frame
    /// (B'^k = Qᵀ B^k Q) and/or of the normal frame (slices mixed by `normal_q`).
    pub fn rotated(&self, horizontal_q: Option<&DMatrix<f64>>, normal_q: Option<&DMatrix<f64>>) -> Self {
        let r = self.rank;
        let nc = self.normal_count;
        let mut slices: Vec<DMatrix<f64>> = (0..nc)
            .map(|k| {
                DMatrix::from_fn(r, r, |i, j| self.get(k, i, j))
            })
            .collect();
        if let Some(q) = horizontal_q {
            for s in slices.iter_mut() {
                *s = q.transpose() * &*s * q;
            }
        }
        if let Some(nq) = normal_q {
            assert_eq!(nq.nrows(), nc);
            let old = slices.clone();
            for (knew, s) in slices.iter_mut().enumerate() {
                let mut acc = DMatrix::zeros(r, r);
                for (kold, o) in old.iter().enumerate() {
                    acc += o * nq[(kold, knew)];
                }
                *s = acc;
            }
        }
        let mut data = vec![0.0; nc * r * r];
        for (k, s) in slices.iter().enumerate() {
            for i in 0..r {
                for j in 0..r {
                    data[(k * r + i) * r + j] = s[(i, j)];
                }
            }
        }
        let mut out = Self::from_components(r, nc, data);
        out.range_residual = self.range_residual;
        out
    }
}

/// Tension field τ = Σ_i (∇dπ)(h_i, h_i), expressed in the range-perp frame.
#[derive(Debug, Clone)]
pub struct TensionField {
    pub components: DVector<f64>,
    pub norm_sq: f64,
    pub harmonic: bool,
}

/// Trace of the second fundamental form.
pub fn tension_field(sff: &SecondFundamentalForm, tol: &Tolerances) -> TensionField {
    let mut components = DVector::zeros(sff.normal_count);
    for k in 0..sff.normal_count {
        let mut s = 0.0;
        for i in 0..sff.rank {
            s += sff.get(k, i, i);
        }
        components[k] = s;
    }
    let norm_sq = components.iter().map(|v| v * v).sum();
    TensionField { components, norm_sq, harmonic: norm_sq.sqrt() < tol.harmonic_tol }
}

/// Shape operator of the k-th normal direction as a symmetric r×r matrix.
pub fn shape_operator(sff: &SecondFundamentalForm, k: usize) -> DMatrix<f64> {
    assert!(k < sff.normal_count, "normal index out of range");
    let r = sff.rank;
    DMatrix::from_fn(r, r, |i, j| 0.5 * (sff.get(k, i, j) + sff.get(k, j, i)))
}

/// Split the tangent spaces at the scenario's `point` into vertical/horizontal
/// on the source and range/range-perp on the target, with orthonormal frames.
pub fn split_frames(
    scenario: &MapScenario,
    point: &[f64],
    step: f64,
    tol: &Tolerances,
) -> Result<SplitFrames> {
    let m = scenario.source.dim;
    let n = scenario.target.dim;
    if point.len() != m {
        return Err(GeomError::DimensionMismatch(format!(
            "point has {} coordinates, source chart has {m}",
            point.len()
        )));
    }
    let image = scenario.map.apply(point);
    if !scenario.target.contains(&image) {
        return Err(GeomError::OutOfDomain { chart: scenario.target.name.clone(), point: image });
    }
    let (g1, _) = scenario.source.metric_with_inverse(point, tol)?;
    let (g2, _) = scenario.target.metric_with_inverse(&image, tol)?;
    // source stencil must stay in-domain for the Jacobian
    for col in 0..m {
        for s in [-step, step] {
            let mut xs = point.to_vec();
            xs[col] += s;
            if !scenario.source.contains(&xs) {
                return Err(GeomError::OutOfDomain { chart: scenario.source.name.clone(), point: xs });
            }
        }
    }
    let j = scenario.map.jacobian(point, step);

    // metric-orthonormalized pushforward A = L2ᵀ J L1^{-ᵀ}
    let l1 = linalg::cholesky_with_pivot(&g1, tol.chol_pivot)?;
    let l2 = linalg::cholesky_with_pivot(&g2, tol.chol_pivot)?;
    let l1_inv_t = l1
        .transpose()
        .try_inverse()
        .ok_or_else(|| GeomError::SingularMetric { point: point.to_vec(), detail: "source factor".into() })?;
    let l2_inv_t = l2
        .transpose()
        .try_inverse()
        .ok_or_else(|| GeomError::SingularMetric { point: point.to_vec(), detail: "target factor".into() })?;
    let a = l2.transpose() * &j * &l1_inv_t;

    let svd = a.clone().svd(true, true);
    let u = svd.u.as_ref().expect("svd with u");
    let v_t = svd.v_t.as_ref().expect("svd with v_t");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| {
        svd.singular_values[j]
            .partial_cmp(&svd.singular_values[i])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(i.cmp(&j))
    });
    let sigma: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let sigma_max = sigma.first().copied().unwrap_or(0.0);
    let rank = sigma.iter().filter(|&&s| s > tol.rank_rel_tol * sigma_max.max(1e-300)).count();
    if rank < scenario.declared_rank_min {
        return Err(GeomError::RankDeficient { rank, required: scenario.declared_rank_min });
    }
    // the nonzero singular values of a Riemannian map are all 1
    for &s in sigma.iter().take(rank) {
        let dev = (s - 1.0).abs();
        if dev > tol.isometry_tol {
            return Err(GeomError::IsometryViolation { value: s, deviation: dev });
        }
    }

    // horizontal/vertical frames from the right singular vectors
    let horizontal: Vec<DVector<f64>> = order
        .iter()
        .take(rank)
        .map(|&i| &l1_inv_t * v_t.row(i).transpose())
        .collect();
    let mut vertical: Vec<DVector<f64>> = order
        .iter()
        .skip(rank)
        .map(|&i| &l1_inv_t * v_t.row(i).transpose())
        .collect();
    if horizontal.len() + vertical.len() < m {
        // when m > n the SVD carries only min(m, n) right singular vectors;
        // the remaining kernel directions come from basis completion

        let eye = DMatrix::<f64>::identity(m, m);
        let cands: Vec<DVector<f64>> = (0..m).map(|k| eye.column(k).into_owned()).collect();
        let mut have = horizontal.clone();
        have.extend(vertical.iter().cloned());
        vertical.extend(linalg::complete_basis(&g1, &have, &cands));
    }

    // range frame: pushforwards of the horizontal frame, re-orthonormalized
    let pushed: Vec<DVector<f64>> = horizontal.iter().map(|h| &j * h).collect();
    let range = linalg::gram_schmidt(&g2, &pushed, 0.5);
    if range.len() != rank {
        return Err(GeomError::IsometryViolation { value: 0.0, deviation: 1.0 });
    }
    // range-perp frame: remaining left singular directions, then completion
    let mut rperp_candidates: Vec<DVector<f64>> = order
        .iter()
        .skip(rank)
        .filter(|&&i| i < u.ncols())
        .map(|&i| &l2_inv_t * u.column(i))
        .collect();
    let eye = DMatrix::<f64>::identity(n, n);
    rperp_candidates.extend((0..n).map(|k| (&l2_inv_t * eye.column(k)).clone_owned()));
    let range_perp = {
        let mut projected: Vec<DVector<f64>> = Vec::new();
        for cand in &rperp_candidates {
            let mut w = cand.clone();
            for b in &range {
                let c = linalg::metric_dot(&g2, &w, b);
                w -= b * c;
            }
            projected.push(w);
        }
        let basis = linalg::gram_schmidt(&g2, &projected, 1e-6);
        if basis.len() != n - rank {
            return Err(GeomError::DimensionMismatch(format!(
                "range-perp completion produced {} of {} vectors",
                basis.len(),
                n - rank
            )));
        }
        basis
    };

    // frame invariants
    let frames = SplitFrames {
        pushforward: j,
        rank,
        horizontal,
        vertical,
        range,
        range_perp,
        singular_values: sigma,
    };
    let mut all_source = frames.horizontal.clone();
    all_source.extend(frames.vertical.iter().cloned());
    let dev1 = linalg::gram_deviation(&g1, &all_source);
    let mut all_target = frames.range.clone();
    all_target.extend(frames.range_perp.iter().cloned());
    let dev2 = linalg::gram_deviation(&g2, &all_target);
    if dev1.max(dev2) > tol.frame_ortho_tol {
        return Err(GeomError::NonOrthonormalFrame { deviation: dev1.max(dev2) });
    }
    // the Riemannian-map identity g1(X,Y) = g2(dπX, dπY) on horizontal pairs
    let mut iso_dev: f64 = 0.0;
    for hi in &frames.horizontal {
        for hk in &frames.horizontal {
            let lhs = linalg::metric_dot(&g1, hi, hk);
            let rhs = linalg::metric_dot(&g2, &frames.push(hi), &frames.push(hk));
            iso_dev = iso_dev.max((lhs - rhs).abs());
        }
    }
    if iso_dev > tol.isometry_tol {
        return Err(GeomError::IsometryViolation { value: 1.0, deviation: iso_dev });
    }
    Ok(frames)
}

/// Second fundamental form by differentiating the pushforward field:
/// (∇dπ)(h_i, h_j) = D_{h_i}(dπ h_j) + Γ₂(dπ h_i, dπ h_j) − dπ(Γ₁(h_i, h_j)),
/// with h_j extended by constant coefficients in source coordinates, then
/// projected onto the range-perp frame.
pub fn second_fundamental_form(
    scenario: &MapScenario,
    frames: &SplitFrames,
    point: &[f64],
    step: f64,
    tol: &Tolerances,
) -> Result<SecondFundamentalForm> {
    let image = scenario.map.apply(point);
    let g2 = scenario.target.metric_at(&image)?;
    let gamma1 = chart::christoffel(&scenario.source, point, step, tol)?;
    let gamma2 = chart::christoffel(&scenario.target, &image, step, tol)?;
    let r = frames.rank;
    let nc = scenario.target.dim - r;

    // directional derivatives of the Jacobian along each horizontal direction
    let mut jac_deriv: Vec<DMatrix<f64>> = Vec::with_capacity(r);
    for h in &frames.horizontal {
        let mut xp = point.to_vec();
        let mut xm = point.to_vec();
        for (c, hv) in h.iter().enumerate() {
            xp[c] += step * hv;
            xm[c] -= step * hv;
        }
        if !scenario.source.contains(&xp) || !scenario.source.contains(&xm) {
            return Err(GeomError::OutOfDomain { chart: scenario.source.name.clone(), point: xp });
        }
        let jp = scenario.map.jacobian(&xp, step);
        let jm = scenario.map.jacobian(&xm, step);
        jac_deriv.push((jp - jm) / (2.0 * step));
    }

    let pushed: Vec<DVector<f64>> = frames.horizontal.iter().map(|h| frames.push(h)).collect();
    let mut data = vec![0.0; nc * r * r];
    let mut range_residual: f64 = 0.0;
    for i in 0..r {
        for jdx in 0..r {
            let second = &jac_deriv[i] * &frames.horizontal[jdx]
                + gamma2.contract(&pushed[i], &pushed[jdx])
                - &frames.pushforward * gamma1.contract(&frames.horizontal[i], &frames.horizontal[jdx]);
            // range part should vanish
            let mut range_part_sq = 0.0;
            for b in &frames.range {
                let c = linalg::metric_dot(&g2, &second, b);
                range_part_sq += c * c;
            }
            range_residual = range_residual.max(range_part_sq.sqrt());
            for (k, v) in frames.range_perp.iter().enumerate() {
                data[(k * r + i) * r + jdx] = linalg::metric_dot(&g2, &second, v);
            }
        }
    }
    let mut sff = SecondFundamentalForm::from_components(r, nc, data);
    sff.range_residual = range_residual;
    Ok(sff)
}

/// Max-abs residual of the Gauss equation over all horizontal 4-tuples:
/// R₁(X,Y,Z,W) − R₂(dπX, dπY, dπZ, dπW)
///   − g2((∇dπ)(Y,Z), (∇dπ)(X,W)) + g2((∇dπ)(X,Z), (∇dπ)(Y,W)).
pub fn gauss_residual(
    frames: &SplitFrames,
    sff: &SecondFundamentalForm,
    rm_horizontal: &CurvatureTensor,
    rn_pushed: &CurvatureTensor,
) -> f64 {
    let r = frames.rank;
    let mut worst: f64 = 0.0;
    for i in 0..r {
        for j in 0..r {
            for k in 0..r {
                for l in 0..r {
                    let mut rhs = rn_pushed.get(i, j, k, l);
                    for a in 0..sff.normal_count {
                        rhs += sff.get(a, j, k) * sff.get(a, i, l)
                            - sff.get(a, i, k) * sff.get(a, j, l);
                    }
                    worst = worst.max((rm_horizontal.get(i, j, k, l) - rhs).abs());
                }
            }
        }
    }
    worst
}

/// Everything the inequality and δ-invariant modules need at one point.
#[derive(Debug, Clone)]
pub struct PointAnalysis {
    pub scenario_name: String,
    pub point: Vec<f64>,
    pub image: Vec<f64>,
    pub g1: DMatrix<f64>,
    pub g2: DMatrix<f64>,
    pub frames: SplitFrames,
    pub sff: SecondFundamentalForm,
    pub tension: TensionField,
    /// Source curvature in chart coordinates.
    pub rm: CurvatureTensor,
    /// Target curvature in chart coordinates.
    pub rn: CurvatureTensor,
    /// Source curvature restricted to the horizontal frame.
    pub rm_horizontal: CurvatureTensor,
    /// Target curvature restricted to the pushforwards of the horizontal frame.
    pub rn_pushed: CurvatureTensor,
    pub gauss_residual: f64,
    /// 2ρ of the horizontal space.
    pub two_rho_h: f64,
    /// 2ρ of the range.
    pub two_rho_r: f64,
}

impl PointAnalysis {
    pub fn rank(&self) -> usize {
        self.frames.rank
    }

    /// Residual of the trace identity 2ρ_H = 2ρ_R − ‖∇dπ‖² + ‖τ‖².
    pub fn trace_identity_residual(&self) -> f64 {
        (self.two_rho_h - (self.two_rho_r - self.sff.norm_sq() + self.tension.norm_sq)).abs()
    }
}

/// Run the full pointwise pipeline for a scenario.
pub fn analyze(scenario: &MapScenario, point: &[f64], tol: &Tolerances) -> Result<PointAnalysis> {
    let step = tol.fd_step;
    let frames = split_frames(scenario, point, step, tol)?;
    let image = scenario.map.apply(point);
    let g1 = scenario.source.metric_at(point)?;
    let g2 = scenario.target.metric_at(&image)?;
    let sff = second_fundamental_form(scenario, &frames, point, step, tol)?;
    let tension = tension_field(&sff, tol);
    let rm = chart::riemann(&scenario.source, point, step, tol)?;
    let rn = chart::riemann(&scenario.target, &image, step, tol)?;
    let rm_horizontal = rm.restrict(&frames.horizontal);
    let pushed: Vec<DVector<f64>> = frames.horizontal.iter().map(|h| frames.push(h)).collect();
    let rn_pushed = rn.restrict(&pushed);
    let residual = gauss_residual(&frames, &sff, &rm_horizontal, &rn_pushed);
    let two_rho_h = chart::doubled_scalar_from_restricted(&rm_horizontal);
    let two_rho_r = chart::doubled_scalar_from_restricted(&rn_pushed);
    Ok(PointAnalysis {
        scenario_name: scenario.name.clone(),
        point: point.to_vec(),
        image,
        g1,
        g2,
        frames,
        sff,
        tension,
        rm,
        rn,
        rm_horizontal,
        rn_pushed,
        gauss_residual: residual,
        two_rho_h,
        two_rho_r,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::{euclidean, sphere_graph_chart, sphere_stereographic};
    use approx::assert_abs_diff_eq;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn projection_r3_r2() -> MapScenario {
        let f: MapField = Arc::new(|x: &[f64]| vec![x[0], x[1]]);
        MapScenario::new(
            "projection",
            euclidean(3),
            euclidean(2),
            CoordinateMap::new(3, 2, f),
            vec![0.2, -0.1, 0.4],
        )
        .with_rank_min(2)
    }

    fn sphere_in_flat_r2() -> MapScenario {
        let f: MapField = Arc::new(|x: &[f64]| {
            let r2 = x[0] * x[0] + x[1] * x[1];
            vec![x[0], x[1], (1.0 - r2).sqrt()]
        });
        MapScenario::new(
            "sphere_inclusion",
            sphere_graph_chart(),
            euclidean(3),
            CoordinateMap::new(2, 3, f),
            vec![0.0, 0.0],
        )
        .with_rank_min(2)
    }

    #[test]
    fn identity_map_splits_trivially() {
        let sc = MapScenario::new(
            "flat_identity",
            euclidean(3),
            euclidean(3),
            CoordinateMap::identity(3),
            vec![0.0; 3],
        );
        let frames = split_frames(&sc, &[0.1, 0.2, 0.3], 1e-4, &tol()).unwrap();
        assert_eq!(frames.rank, 3);
        assert!(frames.vertical.is_empty());
        assert!(frames.range_perp.is_empty());
    }

    #[test]
    fn projection_splits_with_vertical_direction() {
        let sc = projection_r3_r2();
        let frames = split_frames(&sc, &sc.base_point.clone(), 1e-4, &tol()).unwrap();
        assert_eq!(frames.rank, 2);
        assert_eq!(frames.vertical.len(), 1);
        // kernel of the projection is e3
        assert_abs_diff_eq!(frames.vertical[0][2].abs(), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn projection_rejected_at_declared_rank_three() {
        let sc = projection_r3_r2().with_rank_min(3);
        assert!(matches!(
            split_frames(&sc, &[0.0, 0.0, 0.0], 1e-4, &tol()),
            Err(GeomError::RankDeficient { rank: 2, required: 3 })
        ));
    }

    #[test]
    fn non_riemannian_map_is_rejected() {
        let f: MapField = Arc::new(|x: &[f64]| vec![2.0 * x[0], x[1], x[2]]);
        let sc = MapScenario::new(
            "stretch",
            euclidean(3),
            euclidean(3),
            CoordinateMap::new(3, 3, f),
            vec![0.0; 3],
        );
        assert!(matches!(
            split_frames(&sc, &[0.0; 3], 1e-4, &tol()),
            Err(GeomError::IsometryViolation { .. })
        ));
    }

    #[test]
    fn flat_identity_has_zero_second_fundamental_form() {
        let sc = MapScenario::new(
            "flat_identity",
            euclidean(3),
            euclidean(3),
            CoordinateMap::identity(3),
            vec![0.0; 3],
        );
        let a = analyze(&sc, &[0.3, 0.1, -0.2], &tol()).unwrap();
        assert!(a.sff.max_abs() < 1e-10);
        assert!(a.tension.harmonic);
        assert!(a.gauss_residual < 1e-9);
    }

    #[test]
    fn linear_projection_is_totally_geodesic() {
        let sc = projection_r3_r2();
        let a = analyze(&sc, &[0.2, -0.1, 0.4], &tol()).unwrap();
        assert!(a.sff.max_abs() < 1e-10);
        assert!(a.gauss_residual < 1e-9);
    }

    #[test]
    fn unit_sphere_inclusion_shape_operator_at_chart_center() {
        // classical second fundamental form of the unit sphere: ±identity
        let sc = sphere_in_flat_r2();
        let a = analyze(&sc, &[0.0, 0.0], &tol()).unwrap();
        assert_eq!(a.sff.normal_count, 1);
        let s = shape_operator(&a.sff, 0);
        let sign = s[(0, 0)].signum();
        for i in 0..2 {
            for j in 0..2 {
                let expect = if i == j { sign } else { 0.0 };
                assert_abs_diff_eq!(s[(i, j)], expect, epsilon = 1e-6);
            }
        }
        // trace of ±identity gives ‖τ‖² = 4
        assert_abs_diff_eq!(a.tension.norm_sq, 4.0, epsilon = 1e-5);
        assert!(!a.tension.harmonic);
    }

    #[test]
    fn sphere_inclusion_gauss_residual_small() {
        // theorema egregium: K = 1 equals the product of principal curvatures
        let sc = sphere_in_flat_r2();
        let a = analyze(&sc, &[0.1, -0.15], &tol()).unwrap();
        assert!(a.gauss_residual < 1e-4, "residual {}", a.gauss_residual);
        assert!(a.trace_identity_residual() < 1e-4);
    }

    #[test]
    fn sphere_in_sphere_is_totally_geodesic() {
        let f: MapField = Arc::new(|x: &[f64]| vec![x[0], x[1], x[2], 0.0]);
        let sc = MapScenario::new(
            "sphere_in_sphere",
            sphere_stereographic(3, 1.0),
            sphere_stereographic(4, 1.0),
            CoordinateMap::new(3, 4, f),
            vec![0.0; 3],
        );
        let a = analyze(&sc, &[0.2, 0.1, -0.3], &tol()).unwrap();
        assert_eq!(a.rank(), 3);
        assert_eq!(a.sff.normal_count, 1);
        assert!(a.sff.max_abs() < 1e-5);
        assert!(a.gauss_residual < 1e-4);
        // 2ρ = r(r−1) for curvature one
        assert_abs_diff_eq!(a.two_rho_h, 6.0, epsilon = 1e-5);
        assert_abs_diff_eq!(a.two_rho_r, 6.0, epsilon = 1e-5);
    }

    #[test]
    fn tension_of_traceless_form_vanishes() {
        let mut data = vec![0.0; 9];
        data[0] = 1.5; // B^0_{00}
        data[4] = -1.5; // B^0_{11}
        let sff = SecondFundamentalForm::from_components(3, 1, data);
        let t = tension_field(&sff, &tol());
        assert!(t.harmonic);
        assert_eq!(t.norm_sq, 0.0);
    }

    #[test]
    fn shape_operator_is_symmetric_for_random_slice() {
        let data: Vec<f64> = (0..9).map(|i| (i as f64 * 0.37).sin()).collect();
        let sff = SecondFundamentalForm::from_components(3, 1, data);
        let s = shape_operator(&sff, 0);
        assert!((s.clone() - s.transpose()).abs().max() < 1e-15);
    }

    #[test]
    fn trace_identity_on_sphere_inclusion() {
        // 2ρ_H = 2ρ_R − ‖∇dπ‖² + ‖τ‖²: for S² ⊂ R³, 2 = 0 − 2 + 4
        let sc = sphere_in_flat_r2();
        let a = analyze(&sc, &[0.0, 0.0], &tol()).unwrap();
        assert_abs_diff_eq!(a.two_rho_h, 2.0, epsilon = 1e-5);
        assert_abs_diff_eq!(a.two_rho_r, 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(a.sff.norm_sq(), 2.0, epsilon = 1e-5);
    }
}
