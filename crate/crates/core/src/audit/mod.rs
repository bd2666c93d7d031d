//! Exact and empirical analysis of protocol runs.

pub mod dist;
pub mod dp;
pub mod exact;
pub mod info;
pub mod local;
pub mod mc;
pub mod mi;
pub mod stats;
pub mod tv;
pub mod view;

pub use dist::{ExactDistribution, FloatDistribution, JointDistribution};
pub use dp::{dp_audit, AuditConfig, AuditReport, AuditRow};
pub use exact::{hockey_stick_exact, hockey_stick_f64, ExactDelta};
pub use local::{bundle_probability, LocalOutput, LocalRandomizer};
pub use mc::{monte_carlo, McSummary, TrialResult};
pub use mi::{mi_diagnostic, MiDiagnostic};
pub use stats::{chi_squared_gof, chi_squared_two_sample, clopper_pearson};
pub use tv::{tv_estimate, TvEstimate};
pub use view::{exact_view_distribution, ViewEnumerator, ViewMode, DEFAULT_BUDGET};
