//! Cross curvature flow on square torus bundles and `S²` bundles over a
//! circle.
//!
//! Both families carry a metric `f(x)² dx² + g(x)² (fiber)`, and the flow
//! reduces to a degenerate parabolic system for `(f, g)` on the base circle.
//! This crate evaluates the curvature of such metrics in closed form,
//! integrates the reduced system, tracks the geometric functionals the flow
//! is known to control, and turns a run into pass/fail verdicts.
//!
//! ```
//! use xcf_core::{curvature_field, BundleKind, MetricProfile};
//!
//! let profile = MetricProfile::sinusoid(64, std::f64::consts::TAU, 2.0, 0.1, 1.0).unwrap();
//! let field = curvature_field(&profile, BundleKind::Sphere).unwrap();
//! assert!(field.k23.iter().all(|k| (k - 0.25).abs() < 0.03));
//! ```

pub mod claims;
pub mod config;
pub mod curvature;
pub mod diagnostics;
pub mod error;
pub mod flow;
pub mod harness;
pub mod profile;

pub use claims::{evaluate_claims, ClaimId, ClaimTolerances, ClaimVerdict, Status};
pub use config::{load_config, ProfileFamily, ScenarioConfig};
pub use curvature::{
    cross_curvature, cross_curvature_natural, cross_curvature_oracle, curvature_field, s_derivative,
    CurvatureField,
};
pub use diagnostics::{functionals, rate_formulas, DiagnosticsRecord, RateFormulas};
pub use error::{Error, Result};
pub use flow::{evolve, rhs, stable_dt, step, validate_initial, FlowConfig, RecordSink, RunSummary};
pub use harness::{curvature_dump, epsilon_sweep, run_scenario, ScenarioOutcome};
pub use profile::{BundleKind, MetricProfile};
