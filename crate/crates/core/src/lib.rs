//! Mass functionals of asymptotically flat Riemannian metrics.
//!
//! The crate evaluates metrics in a single chart, computes curvature and the
//! geometry of coordinate spheres, and from those the ADM mass, the
//! quasi-local quantity `F_g`, weighted-space mass identities and the cone
//! angle mass of surfaces. The [`sequences`] and [`cone2d`] modules build the
//! convergence sequences used to exhibit lower semicontinuity of mass.

pub mod cone2d;
pub mod error;
pub mod fit;
pub mod jet;
pub mod mass;
pub mod metric;
pub mod quadrature;
pub mod sequences;
pub mod sphere;
pub mod tensor;
pub mod weighted;

pub use error::{Error, Result};
pub use fit::{DecayModel, MassEstimate};
pub use metric::{ChartMetric, ConformalFactor, DerivativeMode, Family, MetricSpec};

/// Version string written into every report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
