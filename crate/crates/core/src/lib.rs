//! Numerical differential geometry for Riemannian maps between chart-defined
//! manifolds.
//!
//! The crate is organized around a pipeline: a [`chart::MetricChart`] describes
//! a manifold through a coordinate chart and a smooth metric field; a
//! [`rmap::MapScenario`] describes a candidate Riemannian map between two
//! charts; [`rmap::analyze`] computes the horizontal/vertical splitting, the
//! second fundamental form, the tension field, and both curvature tensors at a
//! point; the [`chen`] and [`delta`] modules evaluate curvature inequalities
//! and δ-invariant bounds on that data. Closed-form ambient curvature models
//! for generalized complex and generalized Sasakian space forms live in
//! [`space_forms`], and [`catalog`] ships a set of ready-made scenarios.

pub mod catalog;
pub mod chart;
pub mod chen;
pub mod config;
pub mod delta;
pub mod error;
pub mod linalg;
pub mod rmap;
pub mod space_forms;
pub mod sweep;
pub mod tensor;

pub use chart::MetricChart;
pub use chen::{EqualityDiagnostic, InequalityReport, PlanePair};
pub use config::Tolerances;
pub use delta::{DeltaReport, PlaneSearchResult, SearchMode};
pub use error::{GeomError, Result};
pub use rmap::{MapScenario, PointAnalysis, SecondFundamentalForm, SplitFrames, TensionField};
pub use space_forms::{PlaneInvariants, SpaceFormKind, SpaceFormModel, XiPosition};
pub use tensor::{ChristoffelSymbols, CurvatureTensor};
