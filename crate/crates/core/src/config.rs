//! Centralized tolerance configuration.
//!
//! Every numerical threshold used by the engine lives here, so convergence
//! studies and tolerance sweeps have a single knob to turn.

use serde::{Deserialize, Serialize};

/// All tolerances and step sizes used by the engine.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Central-difference step for all coordinate derivatives.
    pub fd_step: f64,
    /// Metric matrices must be symmetric to this level at every valid point.
    pub metric_sym_tol: f64,
    /// Pivot threshold for the positive-definiteness (Cholesky) check.
    pub chol_pivot: f64,
    /// Metric condition number above which inversion is refused.
    pub metric_condition_max: f64,
    /// Curvature tensor symmetry residuals from finite differences.
    pub curvature_sym_tol: f64,
    /// Orthonormality of constructed frames.
    pub frame_ortho_tol: f64,
    /// g1(X,Y) = g2(dπX, dπY) on horizontal pairs; the Riemannian-map gate.
    pub isometry_tol: f64,
    /// Relative singular-value cutoff for rank detection of the pushforward.
    pub rank_rel_tol: f64,
    /// Symmetry and range-perpendicularity of the second fundamental form.
    pub sff_tol: f64,
    /// Max-abs residual of the Gauss equation over horizontal 4-tuples.
    pub gauss_tol: f64,
    /// Tension-field norm below which a map counts as harmonic.
    pub harmonic_tol: f64,
    /// Projection threshold deciding whether ξ sits in the range or its complement.
    pub xi_tol: f64,
    /// An inequality "holds" when slack ≥ −slack_tol.
    pub slack_tol: f64,
    /// |slack| below this reports the equality case.
    pub equality_tol: f64,
    /// Almost-Hermitian / almost-contact structure identities.
    pub structure_tol: f64,
    /// Gram determinant below this rejects a plane as degenerate.
    pub degenerate_plane_tol: f64,
    /// Agreement level for closed-form identity cross-checks.
    pub identity_cross_check_tol: f64,
    /// Agreement of adjacent bound formulas at sign boundaries (f2 = 0, f3 = 0).
    pub branch_boundary_tol: f64,
    /// Threshold for the equality-statement diagnostics (A..I).
    pub statement_flag_tol: f64,
    /// Projected-gradient stopping threshold for the local plane search.
    pub search_grad_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            fd_step: 1e-4,
            metric_sym_tol: 1e-12,
            chol_pivot: 1e-10,
            metric_condition_max: 1e12,
            curvature_sym_tol: 1e-6,
            frame_ortho_tol: 1e-9,
            isometry_tol: 1e-6,
            rank_rel_tol: 1e-7,
            sff_tol: 1e-4,
            gauss_tol: 1e-3,
            harmonic_tol: 1e-6,
            xi_tol: 1e-6,
            slack_tol: 1e-4,
            equality_tol: 1e-5,
            structure_tol: 1e-9,
            degenerate_plane_tol: 1e-10,
            identity_cross_check_tol: 1e-9,
            branch_boundary_tol: 1e-12,
            statement_flag_tol: 1e-6,
            search_grad_tol: 1e-8,
        }
    }
}

impl Tolerances {
    /// Scale the tolerances that absorb finite-difference error by `factor`.
    ///
    /// Structural thresholds (rank cutoff, Cholesky pivot, branch-boundary
    /// agreement) are left untouched; they are not error budgets.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut t = self.clone();
        t.curvature_sym_tol *= factor;
        t.isometry_tol *= factor;
        t.sff_tol *= factor;
        t.gauss_tol *= factor;
        t.harmonic_tol *= factor;
        t.xi_tol *= factor;
        t.slack_tol *= factor;
        t.equality_tol *= factor;
        t
    }
}
