//! Closed-form ambient curvature models: generalized complex space forms
//! (almost Hermitian, curvature driven by J and constants f1, f2) and
//! generalized Sasakian space forms (almost contact metric, curvature driven
//! by φ, ξ, η and constants f1, f2, f3), together with the range/perp
//! decomposition of the structure tensor and the scalar plane invariants.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::error::{GeomError, Result};
use crate::linalg;
use crate::rmap::SplitFrames;
use crate::tensor::CurvatureTensor;

pub type MatrixField = Arc<dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync>;
pub type VectorField = Arc<dyn Fn(&[f64]) -> DVector<f64> + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpaceFormKind {
    /// Generalized complex space form N(f1, f2); even-dimensional.
    Gcsf,
    /// Generalized Sasakian space form N(f1, f2, f3); odd-dimensional.
    Gssf,
}

/// The ambient structure tensor fields.
#[derive(Clone)]
pub enum StructureField {
    /// Almost complex structure x ↦ J(x) with J² = −I and g(JX, JY) = g(X, Y).
    Hermitian { j: MatrixField },
    /// Almost contact structure (φ, ξ, η) with η(ξ) = 1, φ² = −I + η ⊗ ξ,
    /// g(φX, φY) = g(X, Y) − η(X)η(Y).
    Contact { phi: MatrixField, xi: VectorField, eta: VectorField },
}

impl std::fmt::Debug for StructureField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            StructureField::Hermitian { .. } => write!(f, "Hermitian"),
            StructureField::Contact { .. } => write!(f, "Contact"),
        }
    }
}

/// An ambient space-form model: kind, curvature constants, and optionally the
/// structure fields. Operations that evaluate J/φ/ξ/η require the structure;
/// the bound formulas that only consume (f1, f2, f3) do not.
#[derive(Debug, Clone)]
pub struct SpaceFormModel {
    pub kind: SpaceFormKind,
    pub f1: f64,
    pub f2: f64,
    /// Ignored when kind = Gcsf.
    pub f3: f64,
    pub structure: Option<StructureField>,
}

impl SpaceFormModel {
    pub fn gcsf(f1: f64, f2: f64, structure: Option<StructureField>) -> Self {
        Self { kind: SpaceFormKind::Gcsf, f1, f2, f3: 0.0, structure }
    }

    pub fn gssf(f1: f64, f2: f64, f3: f64, structure: Option<StructureField>) -> Self {
        Self { kind: SpaceFormKind::Gssf, f1, f2, f3, structure }
    }

    fn require_structure(&self) -> Result<&StructureField> {
        self.structure.as_ref().ok_or_else(|| {
            GeomError::StructureViolation("model carries no structure field".into())
        })
    }
}

/// Position of ξ relative to the range decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum XiPosition {
    InRange,
    InRangePerp,
    Mixed,
}

impl std::fmt::Display for XiPosition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            XiPosition::InRange => "in_range",
            XiPosition::InRangePerp => "in_range_perp",
            XiPosition::Mixed => "mixed",
        };
        write!(f, "{s}")
    }
}

/// Scalar invariants of the range structure and a chosen plane.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PlaneInvariants {
    /// ‖P‖² = Σ_{ij} (g2(dπh_i, P dπh_j))².
    pub p_norm_sq: f64,
    /// Θ(ℙ) = (g2(dπh_1, P dπh_2))².
    pub theta: f64,
    /// Φ(ℙ) = η(dπh_1)² + η(dπh_2)² (zero in the Hermitian case).
    pub phi: f64,
    /// Ψ(ℙ) = 3/2 ‖P‖² − 3Θ + Φ.
    pub psi: f64,
}

// ---------------------------------------------------------------------------
// structure validation
// ---------------------------------------------------------------------------

fn validate_hermitian(g: &DMatrix<f64>, j: &DMatrix<f64>, tol: f64) -> Result<()> {
    let n = g.nrows();
    if n % 2 != 0 {
        return Err(GeomError::DimensionMismatch(
            "almost complex structure needs even dimension".into(),
        ));
    }
    let jj = j * j;
    let dev_sq = (&jj + DMatrix::<f64>::identity(n, n)).abs().max();
    if dev_sq > tol {
        return Err(GeomError::StructureViolation(format!("J² + I deviates by {dev_sq:.3e}")));
    }
    let compat = (j.transpose() * g * j - g).abs().max();
    if compat > tol {
        return Err(GeomError::StructureViolation(format!(
            "g(JX, JY) − g(X, Y) deviates by {compat:.3e}"
        )));
    }
    Ok(())
}

fn validate_contact(
    g: &DMatrix<f64>,
    phi: &DMatrix<f64>,
    xi: &DVector<f64>,
    eta: &DVector<f64>,
    tol: f64,
) -> Result<()> {
    let n = g.nrows();
    if n % 2 != 1 {
        return Err(GeomError::DimensionMismatch(
            "almost contact structure needs odd dimension".into(),
        ));
    }
    let eta_xi = eta.dot(xi);
    if (eta_xi - 1.0).abs() > tol {
        return Err(GeomError::StructureViolation(format!("η(ξ) = {eta_xi}, expected 1")));
    }
    // φ² = −I + ξ ηᵀ
    let dev = (phi * phi + DMatrix::<f64>::identity(n, n) - xi * eta.transpose()).abs().max();
    if dev > tol {
        return Err(GeomError::StructureViolation(format!("φ² + I − ξ⊗η deviates by {dev:.3e}")));
    }
    // g(φX, φY) = g(X, Y) − η(X) η(Y)
    let compat = (phi.transpose() * g * phi - (g - eta * eta.transpose())).abs().max();
    if compat > tol {
        return Err(GeomError::StructureViolation(format!(
            "g(φX, φY) − g(X, Y) + η(X)η(Y) deviates by {compat:.3e}"
        )));
    }
    let phixi = (phi * xi).abs().max();
    if phixi > tol {
        return Err(GeomError::StructureViolation(format!("φξ deviates by {phixi:.3e}")));
    }
    let etaphi = (eta.transpose() * phi).abs().max();
    if etaphi > tol {
        return Err(GeomError::StructureViolation(format!("η∘φ deviates by {etaphi:.3e}")));
    }
    Ok(())
}

/// Structure tensors evaluated (and validated) at one target point.
pub struct StructureAt {
    /// J or φ as a matrix.
    pub endo: DMatrix<f64>,
    /// ξ, when the structure is almost contact.
    pub xi: Option<DVector<f64>>,
    /// η components, when the structure is almost contact.
    pub eta: Option<DVector<f64>>,
}

pub fn structure_at(
    model: &SpaceFormModel,
    g: &DMatrix<f64>,
    x: &[f64],
    tol: &Tolerances,
) -> Result<StructureAt> {
    match (model.kind, model.require_structure()?) {
        (SpaceFormKind::Gcsf, StructureField::Hermitian { j }) => {
            let jm = j(x);
            validate_hermitian(g, &jm, tol.structure_tol)?;
            Ok(StructureAt { endo: jm, xi: None, eta: None })
        }
        (SpaceFormKind::Gssf, StructureField::Contact { phi, xi, eta }) => {
            let pm = phi(x);
            let xv = xi(x);
            let ev = eta(x);
            validate_contact(g, &pm, &xv, &ev, tol.structure_tol)?;
            Ok(StructureAt { endo: pm, xi: Some(xv), eta: Some(ev) })
        }
        (SpaceFormKind::Gcsf, StructureField::Contact { .. }) => Err(GeomError::StructureViolation(
            "Hermitian model paired with a contact structure".into(),
        )),
        (SpaceFormKind::Gssf, StructureField::Hermitian { .. }) => Err(
            GeomError::StructureViolation("contact model paired with a Hermitian structure".into()),
        ),
    }
}

// ---------------------------------------------------------------------------
// closed-form curvature tensors
// ---------------------------------------------------------------------------

/// Curvature tensor of a generalized complex space form at `x`:
/// R(X1,X2)X3 = f1 {g(X2,X3)X1 − g(X1,X3)X2}
///   + f2 {g(X1,JX3)JX2 − g(X2,JX3)JX1 + 2 g(X1,JX2)JX3}.
pub fn model_curvature_gcsf(
    model: &SpaceFormModel,
    target_metric: &DMatrix<f64>,
    x: &[f64],
    tol: &Tolerances,
) -> Result<CurvatureTensor> {
    if model.kind != SpaceFormKind::Gcsf {
        return Err(GeomError::InvalidInput("model kind is not GCSF".into()));
    }
    let n = target_metric.nrows();
    if n % 2 != 0 {
        return Err(GeomError::DimensionMismatch("GCSF target must be even-dimensional".into()));
    }
    let st = structure_at(model, target_metric, x, tol)?;
    Ok(assemble_model_tensor(model.f1, model.f2, 0.0, target_metric, &st.endo, None, None))
}

/// Curvature tensor of a generalized Sasakian space form at `x`; adds the
/// f3 block driven by η and ξ to the GCSF pattern (with J replaced by φ).
pub fn model_curvature_gssf(
    model: &SpaceFormModel,
    target_metric: &DMatrix<f64>,
    x: &[f64],
    tol: &Tolerances,
) -> Result<CurvatureTensor> {
    if model.kind != SpaceFormKind::Gssf {
        return Err(GeomError::InvalidInput("model kind is not GSSF".into()));
    }
    let n = target_metric.nrows();
    if n % 2 != 1 {
        return Err(GeomError::DimensionMismatch("GSSF target must be odd-dimensional".into()));
    }
    let st = structure_at(model, target_metric, x, tol)?;
    Ok(assemble_model_tensor(
        model.f1,
        model.f2,
        model.f3,
        target_metric,
        &st.endo,
        st.xi.as_ref(),
        st.eta.as_ref(),
    ))
}

/// Shared assembly of the lowered components
/// R_{abcd} = g(R(∂a, ∂b)∂c, ∂d) from the structure data.
fn assemble_model_tensor(
    f1: f64,
    f2: f64,
    f3: f64,
    g: &DMatrix<f64>,
    endo: &DMatrix<f64>,
    xi: Option<&DVector<f64>>,
    eta: Option<&DVector<f64>>,
) -> CurvatureTensor {
    let n = g.nrows();
    // a_{pq} = g(∂p, S ∂q), b_{pq} = g(S ∂p, ∂q)
    let a = g * endo;
    let b = endo.transpose() * g;
    let g_xi: Option<DVector<f64>> = xi.map(|v| g * v);
    let mut t = CurvatureTensor::zeros(n);
    for p in 0..n {
        for q in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let mut v = f1 * (g[(q, c)] * g[(p, d)] - g[(p, c)] * g[(q, d)]);
                    if f2 != 0.0 {
                        v += f2
                            * (a[(p, c)] * b[(q, d)] - a[(q, c)] * b[(p, d)]
                                + 2.0 * a[(p, q)] * b[(c, d)]);
                    }
                    if f3 != 0.0 {
                        let (ev, gx) = (eta.unwrap(), g_xi.as_ref().unwrap());
                        v += f3
                            * (ev[p] * ev[c] * g[(q, d)] - ev[q] * ev[c] * g[(p, d)]
                                + g[(p, c)] * ev[q] * gx[d]
                                - g[(q, c)] * ev[p] * gx[d]);
                    }
                    t.set(p, q, c, d, v);
                }
            }
        }
    }
    t
}

// ---------------------------------------------------------------------------
// family coefficient tables
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpaceFormFamily {
    Real,
    Complex,
    RealKahler,
    Sasakian,
    Kenmotsu,
    Cosymplectic,
    AlmostCAlpha,
}

impl SpaceFormFamily {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "real" => Ok(Self::Real),
            "complex" => Ok(Self::Complex),
            "real_kahler" => Ok(Self::RealKahler),
            "sasakian" => Ok(Self::Sasakian),
            "kenmotsu" => Ok(Self::Kenmotsu),
            "cosymplectic" => Ok(Self::Cosymplectic),
            "almost_c_alpha" => Ok(Self::AlmostCAlpha),
            other => Err(GeomError::UnknownFamily(other.into())),
        }
    }

    pub fn kind(&self) -> SpaceFormKind {
        match self {
            Self::Real | Self::Complex | Self::RealKahler => SpaceFormKind::Gcsf,
            _ => SpaceFormKind::Gssf,
        }
    }
}

impl std::fmt::Display for SpaceFormFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Self::Real => "real",
            Self::Complex => "complex",
            Self::RealKahler => "real_kahler",
            Self::Sasakian => "sasakian",
            Self::Kenmotsu => "kenmotsu",
            Self::Cosymplectic => "cosymplectic",
            Self::AlmostCAlpha => "almost_c_alpha",
        };
        write!(f, "{s}")
    }
}

/// Curvature constants (f1, f2, f3) of the classical families; f3 mirrors f2
/// for the contact families and is unused for the Hermitian ones.
pub fn table_coefficients(family: SpaceFormFamily, c: f64, alpha: f64) -> (f64, f64, f64) {
    match family {
        SpaceFormFamily::Real => (c, 0.0, 0.0),
        SpaceFormFamily::Complex => (c, c, 0.0),
        SpaceFormFamily::RealKahler => (c + 3.0 * alpha, c - alpha, 0.0),
        SpaceFormFamily::Sasakian => (c + 3.0, c - 1.0, c - 1.0),
        SpaceFormFamily::Kenmotsu => (c - 3.0, c + 1.0, c + 1.0),
        SpaceFormFamily::Cosymplectic => (c, c, c),
        SpaceFormFamily::AlmostCAlpha => {
            (c + 3.0 * alpha * alpha, c - alpha * alpha, c - alpha * alpha)
        }
    }
}

// ---------------------------------------------------------------------------
// range endomorphism and plane invariants
// ---------------------------------------------------------------------------

/// Matrix of the range part of the structure endomorphism:
/// P_ij = g2(dπh_i, S dπh_j) over the orthonormal range frame. Skew-symmetric
/// because both J and φ are metric-skew.
pub fn range_endomorphism(
    model: &SpaceFormModel,
    frames: &SplitFrames,
    g2: &DMatrix<f64>,
    x: &[f64],
    tol: &Tolerances,
) -> Result<DMatrix<f64>> {
    let st = structure_at(model, g2, x, tol)?;
    let r = frames.rank;
    let mut p = DMatrix::zeros(r, r);
    for (jdx, rj) in frames.range.iter().enumerate() {
        let srj = &st.endo * rj;
        for (i, ri) in frames.range.iter().enumerate() {
            p[(i, jdx)] = linalg::metric_dot(g2, ri, &srj);
        }
    }
    Ok(p)
}

/// η evaluated on the range frame vectors (zero vector for Hermitian models).
pub fn eta_on_range(
    model: &SpaceFormModel,
    frames: &SplitFrames,
    g2: &DMatrix<f64>,
    x: &[f64],
    tol: &Tolerances,
) -> Result<DVector<f64>> {
    let r = frames.rank;
    match model.kind {
        SpaceFormKind::Gcsf => Ok(DVector::zeros(r)),
        SpaceFormKind::Gssf => {
            let st = structure_at(model, g2, x, tol)?;
            let eta = st.eta.expect("contact structure has eta");
            Ok(DVector::from_fn(r, |i, _| eta.dot(&frames.range[i])))
        }
    }
}

/// Scalar invariants for a plane given by two orthonormal horizontal-frame
/// coordinate vectors (u, v ∈ R^r).
pub fn plane_invariants(
    p_matrix: &DMatrix<f64>,
    eta_range: &DVector<f64>,
    u: &DVector<f64>,
    v: &DVector<f64>,
) -> PlaneInvariants {
    let p_norm_sq = p_matrix.iter().map(|e| e * e).sum::<f64>();
    let theta = {
        let t = (u.transpose() * p_matrix * v)[(0, 0)];
        t * t
    };
    let e1 = eta_range.dot(u);
    let e2 = eta_range.dot(v);
    let phi = e1 * e1 + e2 * e2;
    PlaneInvariants { p_norm_sq, theta, phi, psi: 1.5 * p_norm_sq - 3.0 * theta + phi }
}

/// Decide whether ξ lies in the range, in its orthogonal complement, or mixes.
pub fn xi_position(
    model: &SpaceFormModel,
    frames: &SplitFrames,
    g2: &DMatrix<f64>,
    x: &[f64],
    tol: &Tolerances,
) -> Result<XiPosition> {
    if model.kind != SpaceFormKind::Gssf {
        return Err(GeomError::InvalidInput("ξ position is defined for GSSF models only".into()));
    }
    let st = structure_at(model, g2, x, tol)?;
    let xi = st.xi.expect("contact structure has xi");
    let proj = |frame: &[DVector<f64>]| -> f64 {
        frame
            .iter()
            .map(|b| {
                let c = linalg::metric_dot(g2, &xi, b);
                c * c
            })
            .sum::<f64>()
            .sqrt()
    };
    let in_range = proj(&frames.range);
    let in_perp = proj(&frames.range_perp);
    if in_perp < tol.xi_tol {
        Ok(XiPosition::InRange)
    } else if in_range < tol.xi_tol {
        Ok(XiPosition::InRangePerp)
    } else {
        Ok(XiPosition::Mixed)
    }
}

// ---------------------------------------------------------------------------
// built-in structure fields
// ---------------------------------------------------------------------------

/// Constant block complex structure pairing coordinates (0,1), (2,3), …:
/// J e_{2a} = e_{2a+1}, J e_{2a+1} = −e_{2a}.
pub fn standard_complex_structure(dim: usize) -> StructureField {
    assert!(dim % 2 == 0);
    StructureField::Hermitian {
        j: Arc::new(move |_x: &[f64]| {
            let mut j = DMatrix::zeros(dim, dim);
            for a in 0..dim / 2 {
                j[(2 * a + 1, 2 * a)] = 1.0;
                j[(2 * a, 2 * a + 1)] = -1.0;
            }
            j
        }),
    }
}

/// Constant contact structure on flat odd space: ξ = e_{n−1}, η = dual of ξ,
/// φ = the standard complex structure on the first n−1 coordinates.
pub fn flat_contact_structure(dim: usize) -> StructureField {
    assert!(dim % 2 == 1);
    let phi: MatrixField = Arc::new(move |_x: &[f64]| {
        let mut p = DMatrix::zeros(dim, dim);
        for a in 0..(dim - 1) / 2 {
            p[(2 * a + 1, 2 * a)] = 1.0;
            p[(2 * a, 2 * a + 1)] = -1.0;
        }
        p
    });
    let xi: VectorField = Arc::new(move |_x: &[f64]| {
        let mut v = DVector::zeros(dim);
        v[dim - 1] = 1.0;
        v
    });
    let eta: VectorField = Arc::new(move |_x: &[f64]| {
        let mut v = DVector::zeros(dim);
        v[dim - 1] = 1.0;
        v
    });
    StructureField::Contact { phi, xi, eta }
}

/// Constant contact structure on flat space adapted to a chosen ξ axis and a
/// pairing of the remaining axes, given as a permutation of 0..dim:
/// `axes[0]` is the ξ axis; (axes[1], axes[2]), (axes[3], axes[4]), … are the
/// φ-rotation planes.
pub fn flat_contact_structure_adapted(dim: usize, axes: Vec<usize>) -> StructureField {
    assert!(dim % 2 == 1);
    assert_eq!(axes.len(), dim);
    let xi_axis = axes[0];
    let pairs: Vec<(usize, usize)> =
        (0..(dim - 1) / 2).map(|k| (axes[1 + 2 * k], axes[2 + 2 * k])).collect();
    let phi: MatrixField = Arc::new(move |_x: &[f64]| {
        let mut p = DMatrix::zeros(dim, dim);
        for &(a, b) in &pairs {
            p[(b, a)] = 1.0;
            p[(a, b)] = -1.0;
        }
        p
    });
    let xi: VectorField = Arc::new(move |_x: &[f64]| {
        let mut v = DVector::zeros(dim);
        v[xi_axis] = 1.0;
        v
    });
    let eta: VectorField = Arc::new(move |_x: &[f64]| {
        let mut v = DVector::zeros(dim);
        v[xi_axis] = 1.0;
        v
    });
    StructureField::Contact { phi, xi, eta }
}

/// Inverse stereographic embedding of the unit n-sphere chart into R^{n+1}
/// and its differential, used to pull the ambient structures back to the chart.
fn stereographic_embed(x: &[f64]) -> (DVector<f64>, DMatrix<f64>) {
    let n = x.len();
    let r2: f64 = x.iter().map(|v| v * v).sum();
    let w = 1.0 + r2;
    let mut p = DVector::zeros(n + 1);
    for i in 0..n {
        p[i] = 2.0 * x[i] / w;
    }
    p[n] = (r2 - 1.0) / w;
    let mut d = DMatrix::zeros(n + 1, n);
    for i in 0..n {
        for j in 0..n {
            let mut v = -4.0 * x[i] * x[j] / (w * w);
            if i == j {
                v += 2.0 / w;
            }
            d[(i, j)] = v;
        }
    }
    for j in 0..n {
        d[(n, j)] = 4.0 * x[j] / (w * w);
    }
    (p, d)
}

/// Standard contact structure of the unit odd sphere S^{2s+1} ⊂ C^{s+1},
/// pulled back to the stereographic chart. ξ is the Hopf field J·p carried
/// through the chart differential.
pub fn odd_sphere_contact_structure(dim: usize) -> StructureField {
    assert!(dim % 2 == 1);
    let amb = dim + 1; // even
    let j_amb = {
        let mut j = DMatrix::zeros(amb, amb);
        for a in 0..amb / 2 {
            j[(2 * a + 1, 2 * a)] = 1.0;
            j[(2 * a, 2 * a + 1)] = -1.0;
        }
        j
    };
    let pseudo_inverse = |d: &DMatrix<f64>| -> DMatrix<f64> {
        let g = d.transpose() * d;
        let gi = g.try_inverse().expect("chart differential has full rank");
        gi * d.transpose()
    };
    let j1 = j_amb.clone();
    let phi: MatrixField = Arc::new(move |x: &[f64]| {
        let (p, d) = stereographic_embed(x);
        let dpi = pseudo_inverse(&d);
        let jp = &j1 * &p;
        // φ v = D⁺ (J D v + η(v) p), η(v) = ⟨D v, J p⟩
        let eta_row = (d.transpose() * &jp).transpose();
        &dpi * (&j1 * &d + &p * eta_row)
    });
    let j2 = j_amb.clone();
    let xi: VectorField = Arc::new(move |x: &[f64]| {
        let (p, d) = stereographic_embed(x);
        let dpi = pseudo_inverse(&d);
        &dpi * (&j2 * &p)
    });
    let j3 = j_amb;
    let eta: VectorField = Arc::new(move |x: &[f64]| {
        let (p, d) = stereographic_embed(x);
        d.transpose() * (&j3 * &p)
    });
    StructureField::Contact { phi, xi, eta }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn table_matches_family_rows() {
        assert_eq!(table_coefficients(SpaceFormFamily::Sasakian, 1.0, 0.0), (4.0, 0.0, 0.0));
        assert_eq!(table_coefficients(SpaceFormFamily::Cosymplectic, 0.0, 0.0), (0.0, 0.0, 0.0));
        assert_eq!(table_coefficients(SpaceFormFamily::RealKahler, 1.0, 1.0), (4.0, 0.0, 0.0));
        assert_eq!(table_coefficients(SpaceFormFamily::Real, -2.0, 0.0), (-2.0, 0.0, 0.0));
        let (f1, f2, f3) = table_coefficients(SpaceFormFamily::AlmostCAlpha, 1.0, 2.0);
        assert_eq!((f1, f2, f3), (13.0, -3.0, -3.0));
        // sectional curvature f1 + 3 f2 = 4c across the contact rows
        for fam in
            [SpaceFormFamily::Sasakian, SpaceFormFamily::Kenmotsu, SpaceFormFamily::Cosymplectic]
        {
            let (f1, f2, _) = table_coefficients(fam, 0.7, 0.0);
            assert_abs_diff_eq!(f1 + 3.0 * f2, 2.8, epsilon = 1e-14);
        }
        assert!(SpaceFormFamily::parse("nope").is_err());
    }

    #[test]
    fn gcsf_curvature_reduces_to_constant_curvature_when_f2_zero() {
        let g = DMatrix::<f64>::identity(4, 4);
        let model = SpaceFormModel::gcsf(0.8, 0.0, Some(standard_complex_structure(4)));
        let t = model_curvature_gcsf(&model, &g, &[0.0; 4], &tol()).unwrap();
        let expect = CurvatureTensor::constant_curvature(0.8, &g);
        assert!(t.max_difference(&expect) < 1e-14);
    }

    #[test]
    fn gcsf_zero_coefficients_give_zero_tensor() {
        let g = DMatrix::<f64>::identity(4, 4);
        let model = SpaceFormModel::gcsf(0.0, 0.0, Some(standard_complex_structure(4)));
        let t = model_curvature_gcsf(&model, &g, &[0.0; 4], &tol()).unwrap();
        assert_eq!(t.max_abs(), 0.0);
    }

    #[test]
    fn gcsf_tensor_satisfies_curvature_symmetries() {
        let g = DMatrix::<f64>::identity(6, 6);
        let model = SpaceFormModel::gcsf(0.3, -0.9, Some(standard_complex_structure(6)));
        let t = model_curvature_gcsf(&model, &g, &[0.0; 6], &tol()).unwrap();
        assert!(t.symmetry_residuals().max() < 1e-12);
    }

    #[test]
    fn gssf_tensor_satisfies_curvature_symmetries() {
        let g = DMatrix::<f64>::identity(5, 5);
        let model = SpaceFormModel::gssf(0.4, 1.1, -0.6, Some(flat_contact_structure(5)));
        let t = model_curvature_gssf(&model, &g, &[0.0; 5], &tol()).unwrap();
        assert!(t.symmetry_residuals().max() < 1e-12);
    }

    #[test]
    fn gssf_reduces_to_gcsf_pattern_when_f3_zero() {
        let g = DMatrix::<f64>::identity(5, 5);
        let m1 = SpaceFormModel::gssf(0.5, 0.7, 0.0, Some(flat_contact_structure(5)));
        let t1 = model_curvature_gssf(&m1, &g, &[0.0; 5], &tol()).unwrap();
        // same assembly with the φ-pattern but no η block
        let phi = match flat_contact_structure(5) {
            StructureField::Contact { phi, .. } => phi(&[0.0; 5]),
            _ => unreachable!(),
        };
        let t2 = assemble_model_tensor(0.5, 0.7, 0.0, &g, &phi, None, None);
        assert!(t1.max_difference(&t2) < 1e-15);
    }

    #[test]
    fn cp1_model_matches_numeric_curvature() {
        let chart = chart::fubini_study(1, 1.0);
        let x = [0.15, -0.2];
        let g = chart.metric_at(&x).unwrap();
        let numeric = chart::riemann(&chart, &x, 1e-4, &tol()).unwrap();
        let model = SpaceFormModel::gcsf(1.0, 1.0, Some(standard_complex_structure(2)));
        let closed = model_curvature_gcsf(&model, &g, &x, &tol()).unwrap();
        assert!(numeric.max_difference(&closed) < 1e-4);
    }

    #[test]
    fn cp2_model_matches_numeric_curvature() {
        let chart = chart::fubini_study(2, 1.0);
        let x = [0.1, -0.05, 0.2, 0.15];
        let g = chart.metric_at(&x).unwrap();
        let numeric = chart::riemann(&chart, &x, 1e-4, &tol()).unwrap();
        let model = SpaceFormModel::gcsf(1.0, 1.0, Some(standard_complex_structure(4)));
        let closed = model_curvature_gcsf(&model, &g, &x, &tol()).unwrap();
        assert!(numeric.max_difference(&closed) < 1e-4);
    }

    #[test]
    fn odd_sphere_contact_structure_matches_unit_curvature() {
        let chart = chart::sphere_stereographic(3, 1.0);
        let x = [0.2, -0.1, 0.3];
        let g = chart.metric_at(&x).unwrap();
        let model = SpaceFormModel::gssf(1.0, 0.0, 0.0, Some(odd_sphere_contact_structure(3)));
        let closed = model_curvature_gssf(&model, &g, &x, &tol()).unwrap();
        let numeric = chart::riemann(&chart, &x, 1e-4, &tol()).unwrap();
        assert!(numeric.max_difference(&closed) < 1e-4);
    }

    #[test]
    fn contact_identities_hold_on_sphere_chart() {
        let chart = chart::sphere_stereographic(5, 1.0);
        let x = [0.2, -0.1, 0.05, 0.3, -0.25];
        let g = chart.metric_at(&x).unwrap();
        match odd_sphere_contact_structure(5) {
            StructureField::Contact { phi, xi, eta } => {
                validate_contact(&g, &phi(&x), &xi(&x), &eta(&x), 1e-9).unwrap();
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn structure_violation_detected() {
        let g = DMatrix::<f64>::identity(4, 4);
        let bad = StructureField::Hermitian {
            j: Arc::new(|_x: &[f64]| DMatrix::<f64>::identity(4, 4) * 0.5),
        };
        let model = SpaceFormModel::gcsf(1.0, 1.0, Some(bad));
        assert!(matches!(
            model_curvature_gcsf(&model, &g, &[0.0; 4], &tol()),
            Err(GeomError::StructureViolation(_))
        ));
    }

    #[test]
    fn range_endomorphism_is_skew() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 6;
        let g = DMatrix::<f64>::identity(n, n);
        // random orthonormal 3-frame
        let vecs: Vec<DVector<f64>> =
            (0..3).map(|_| DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0))).collect();
        let frame = linalg::gram_schmidt(&g, &vecs, 1e-9);
        let frames = SplitFrames {
            pushforward: DMatrix::identity(n, n),
            rank: 3,
            horizontal: frame.clone(),
            vertical: vec![],
            range: frame,
            range_perp: vec![],
            singular_values: vec![1.0; 3],
        };
        let model = SpaceFormModel::gcsf(1.0, 1.0, Some(standard_complex_structure(n)));
        let p = range_endomorphism(&model, &frames, &g, &[0.0; n], &tol()).unwrap();
        assert!((p.clone() + p.transpose()).abs().max() < 1e-12);
    }

    #[test]
    fn xi_position_classifies_all_three_cases() {
        let n = 5;
        let g = DMatrix::<f64>::identity(n, n);
        let eye = DMatrix::<f64>::identity(n, n);
        let frames = |range_idx: Vec<usize>, perp_idx: Vec<usize>| SplitFrames {
            pushforward: DMatrix::identity(n, n),
            rank: range_idx.len(),
            horizontal: range_idx.iter().map(|&i| eye.column(i).into_owned()).collect(),
            vertical: vec![],
            range: range_idx.iter().map(|&i| eye.column(i).into_owned()).collect(),
            range_perp: perp_idx.iter().map(|&i| eye.column(i).into_owned()).collect(),
            singular_values: vec![1.0; 3],
        };
        // ξ = e4 by construction of flat_contact_structure(5)
        let model = SpaceFormModel::gssf(0.0, 0.0, 0.0, Some(flat_contact_structure(5)));
        let f_in = frames(vec![0, 1, 4], vec![2, 3]);
        assert_eq!(xi_position(&model, &f_in, &g, &[0.0; 5], &tol()).unwrap(), XiPosition::InRange);
        let f_perp = frames(vec![0, 1, 2], vec![3, 4]);
        assert_eq!(
            xi_position(&model, &f_perp, &g, &[0.0; 5], &tol()).unwrap(),
            XiPosition::InRangePerp
        );
        // ξ split between range and perp
        let s = 0.5f64.sqrt();
        let mut mixed_range = vec![eye.column(0).into_owned(), eye.column(1).into_owned()];
        let mut v = DVector::zeros(n);
        v[2] = s;
        v[4] = s;
        mixed_range.push(v);
        let mut w = DVector::zeros(n);
        w[2] = s;
        w[4] = -s;
        let f_mixed = SplitFrames {
            pushforward: DMatrix::identity(n, n),
            rank: 3,
            horizontal: mixed_range.clone(),
            vertical: vec![],
            range: mixed_range,
            range_perp: vec![eye.column(3).into_owned(), w],
            singular_values: vec![1.0; 3],
        };
        assert_eq!(xi_position(&model, &f_mixed, &g, &[0.0; 5], &tol()).unwrap(), XiPosition::Mixed);
    }

    #[test]
    fn plane_invariant_bounds_and_psi_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let r = 4;
            let mut p = DMatrix::<f64>::zeros(r, r);
            for i in 0..r {
                for j in (i + 1)..r {
                    let v = rng.gen_range(-0.4..0.4);
                    p[(i, j)] = v;
                    p[(j, i)] = -v;
                }
            }
            let eta = DVector::from_fn(r, |_, _| rng.gen_range(-0.4..0.4));
            let u = DVector::from_fn(r, |i, _| if i == 0 { 1.0 } else { 0.0 });
            let v = DVector::from_fn(r, |i, _| if i == 1 { 1.0 } else { 0.0 });
            let inv = plane_invariants(&p, &eta, &u, &v);
            assert!(inv.theta >= 0.0);
            assert!(inv.p_norm_sq >= 0.0);
            assert!(inv.phi >= 0.0);
            assert_abs_diff_eq!(
                inv.psi,
                1.5 * inv.p_norm_sq - 3.0 * inv.theta + inv.phi,
                epsilon = 1e-15
            );
        }
    }

    #[test]
    fn holomorphic_range_has_full_p_norm() {
        // range invariant under J: ‖P‖² = r
        let n = 4;
        let g = DMatrix::<f64>::identity(n, n);
        let eye = DMatrix::<f64>::identity(n, n);
        let frames = SplitFrames {
            pushforward: DMatrix::identity(n, n),
            rank: 4,
            horizontal: (0..4).map(|i| eye.column(i).into_owned()).collect(),
            vertical: vec![],
            range: (0..4).map(|i| eye.column(i).into_owned()).collect(),
            range_perp: vec![],
            singular_values: vec![1.0; 4],
        };
        let model = SpaceFormModel::gcsf(1.0, 1.0, Some(standard_complex_structure(n)));
        let p = range_endomorphism(&model, &frames, &g, &[0.0; n], &tol()).unwrap();
        let norm_sq: f64 = p.iter().map(|e| e * e).sum();
        assert_abs_diff_eq!(norm_sq, 4.0, epsilon = 1e-12);
    }

    #[test]
    fn totally_real_range_has_zero_p() {
        // J maps span{e0, e2} into span{e1, e3}
        let n = 4;
        let g = DMatrix::<f64>::identity(n, n);
        let eye = DMatrix::<f64>::identity(n, n);
        let frames = SplitFrames {
            pushforward: DMatrix::identity(n, n),
            rank: 2,
            horizontal: vec![eye.column(0).into_owned(), eye.column(2).into_owned()],
            vertical: vec![],
            range: vec![eye.column(0).into_owned(), eye.column(2).into_owned()],
            range_perp: vec![eye.column(1).into_owned(), eye.column(3).into_owned()],
            singular_values: vec![1.0; 2],
        };
        let model = SpaceFormModel::gcsf(1.0, 1.0, Some(standard_complex_structure(n)));
        let p = range_endomorphism(&model, &frames, &g, &[0.0; n], &tol()).unwrap();
        assert!(p.abs().max() < 1e-14);
    }

    #[test]
    fn gssf_contact_row_vanishes_at_xi_direction() {
        // φξ = 0 forces the ξ row and column of P to vanish
        let n = 5;
        let g = DMatrix::<f64>::identity(n, n);
        let eye = DMatrix::<f64>::identity(n, n);
        let frames = SplitFrames {
            pushforward: DMatrix::identity(n, n),
            rank: 3,
            horizontal: vec![
                eye.column(0).into_owned(),
                eye.column(1).into_owned(),
                eye.column(4).into_owned(),
            ],
            vertical: vec![],
            range: vec![
                eye.column(0).into_owned(),
                eye.column(1).into_owned(),
                eye.column(4).into_owned(),
            ],
            range_perp: vec![eye.column(2).into_owned(), eye.column(3).into_owned()],
            singular_values: vec![1.0; 3],
        };
        let model = SpaceFormModel::gssf(1.0, 1.0, 1.0, Some(flat_contact_structure(5)));
        let p = range_endomorphism(&model, &frames, &g, &[0.0; n], &tol()).unwrap();
        for i in 0..3 {
            assert!(p[(2, i)].abs() < 1e-14);
            assert!(p[(i, 2)].abs() < 1e-14);
        }
    }
}
