//! Riemannian metrics in a single asymptotically flat chart.
//!
//! A [`MetricSpec`] is a declarative, serializable description of a metric
//! family. Components are evaluated on [`Jet`] coordinates, so one code path
//! gives values and exact chart derivatives; finite differences are kept as
//! an alternative derivative mode.

use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::cone2d::ConicalSurface;
use crate::error::{Error, Result};
use crate::jet::{norm_sq, Jet, MAX_DIM};
use crate::sequences::{BumpProfile, ShellFamily};
use crate::tensor::{self, MetricDerivatives, PointwiseCurvature};

/// Anything that can produce metric components on jet coordinates.
pub trait ChartMetric: Sync {
    fn dim(&self) -> usize;

    /// Row-major `dim × dim` components at `x`.
    fn components(&self, x: &[Jet]) -> Result<Vec<Jet>>;

    /// Signed distance to the excluded locus; non-positive means singular.
    fn boundary_distance(&self, _x: &[f64]) -> f64 {
        f64::INFINITY
    }
}

/// Conformal factor `U` of a metric `U^{4/(n-2)} δ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "factor", rename_all = "snake_case")]
pub enum ConformalFactor {
    /// `U = 1 + a |x|^{2-n}`
    PointMass { a: f64 },
    /// `U = 1 + a |x|^{2-n} + (d·x) |x|^{-n}`, harmonic.
    Multipole { a: f64, dipole: Vec<f64> },
    /// `U = 1 + A exp(-|x|²/w²)`, smooth on all of ℝⁿ.
    Gaussian { amplitude: f64, width: f64 },
}

impl ConformalFactor {
    fn eval(&self, n: usize, x: &[Jet]) -> Jet {
        let r2 = norm_sq(x);
        let nf = n as f64;
        match self {
            ConformalFactor::PointMass { a } => r2.powf((2.0 - nf) / 2.0) * *a + 1.0,
            ConformalFactor::Multipole { a, dipole } => {
                let mut dx = Jet::constant(r2.dim(), 0.0);
                for (xi, di) in x.iter().zip(dipole) {
                    dx = dx + *xi * *di;
                }
                r2.powf((2.0 - nf) / 2.0) * *a + dx * r2.powf(-nf / 2.0) + 1.0
            }
            ConformalFactor::Gaussian { amplitude, width } => {
                (r2 * (-1.0 / (width * width))).exp() * *amplitude + 1.0
            }
        }
    }

    fn singular_at_origin(&self) -> bool {
        !matches!(self, ConformalFactor::Gaussian { .. })
    }

    fn is_radial(&self) -> bool {
        match self {
            ConformalFactor::Multipole { dipole, .. } => dipole.iter().all(|&d| d == 0.0),
            _ => true,
        }
    }
}

/// Perturbation `h_ij = c |x|^{-k} b(ω) (δ_ij + ω_i ω_j)` with `ω = x/|x|`,
/// `b(ω) = 1 + ω_1/2 + ω_1 ω_2` and `k` the decay order (default `n - 1`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Perturbation {
    pub amplitude: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<f64>,
}

impl Perturbation {
    pub fn order(&self, n: usize) -> f64 {
        self.order.unwrap_or(n as f64 - 1.0)
    }

    fn add_to(&self, n: usize, x: &[Jet], comps: &mut [Jet]) {
        let r2 = norm_sq(x);
        let inv_r = r2.powf(-0.5);
        let omega: Vec<Jet> = x.iter().map(|xi| *xi * inv_r).collect();
        let bump = omega[0] * 0.5 + omega[0] * omega[1] + 1.0;
        let envelope = r2.powf(-self.order(n) / 2.0) * bump * self.amplitude;
        for i in 0..n {
            for j in i..n {
                let mut t = omega[i] * omega[j];
                if i == j {
                    t = t + 1.0;
                }
                let h = envelope * t;
                comps[i * n + j] += h;
                if i != j {
                    comps[j * n + i] += h;
                }
            }
        }
    }
}

#[derive(Clone, Debug)]
pub enum Family {
    Euclidean,
    /// `(1 + m/(2|x|^{n-2}))^{4/(n-2)} δ` on `|x| > inner_radius`.
    Schwarzschild { mass: f64, inner_radius: f64 },
    ConformallyFlat(ConformalFactor),
    /// Schwarzschild plus a perturbation decaying like `|x|^{1-n}`.
    AsymptoticallySchwarzschild {
        mass: f64,
        perturbation: Perturbation,
        inner_radius: f64,
    },
    /// Two-dimensional cone `dr² + α² r² dθ²` in Cartesian coordinates.
    Cone2D(ConicalSurface),
    /// `λ² · base`, same chart.
    Scaled { base: Box<MetricSpec>, lambda: f64 },
    /// `base(x + offset)`.
    Translated {
        base: Box<MetricSpec>,
        offset: Vec<f64>,
    },
    /// `base(x / λ)`: the asymptotically flat chart of `λ² · base`.
    Dilated { base: Box<MetricSpec>, lambda: f64 },
    /// `u_i^{4/(n-2)} δ` for the matter-shell sequence.
    ShellConformal(Arc<ShellFamily>),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DerivativeMode {
    Analytic,
    /// Second-order central differences; `None` selects
    /// `ε^{1/3} · max(1, |x|)`.
    FiniteDifference { step: Option<f64> },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "RawSpec", into = "RawSpec")]
pub struct MetricSpec {
    n: usize,
    family: Family,
    derivative_mode: DerivativeMode,
}

#[derive(Serialize, Deserialize)]
struct RawSpec {
    n: usize,
    family: String,
    #[serde(default)]
    params: Value,
    #[serde(default = "default_mode")]
    derivative_mode: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    fd_step: Option<f64>,
}

fn default_mode() -> String {
    "analytic".into()
}

#[derive(Serialize, Deserialize)]
struct MassParams {
    m: f64,
    #[serde(default)]
    inner_radius: f64,
}

#[derive(Serialize, Deserialize)]
struct AsParams {
    m: f64,
    perturbation: Perturbation,
    #[serde(default)]
    inner_radius: f64,
}

#[derive(Serialize, Deserialize)]
struct WrapParams {
    base: MetricSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    offset: Option<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct ShellParams {
    index: u32,
    #[serde(default = "default_shell_nodes")]
    nodes: usize,
    #[serde(default)]
    profile: BumpProfile,
}

fn default_shell_nodes() -> usize {
    64
}

fn parse<T: serde::de::DeserializeOwned>(family: &str, params: Value) -> Result<T> {
    serde_json::from_value(params)
        .map_err(|e| Error::InvalidSpec(format!("bad params for {family}: {e}")))
}

impl TryFrom<RawSpec> for MetricSpec {
    type Error = Error;

    fn try_from(raw: RawSpec) -> Result<Self> {
        let n = raw.n;
        let family = match raw.family.as_str() {
            "euclidean" => Family::Euclidean,
            "schwarzschild" => {
                let p: MassParams = parse(&raw.family, raw.params)?;
                Family::Schwarzschild {
                    mass: p.m,
                    inner_radius: p.inner_radius,
                }
            }
            "conformally_flat" => Family::ConformallyFlat(parse(&raw.family, raw.params)?),
            "asymptotically_schwarzschild" => {
                let p: AsParams = parse(&raw.family, raw.params)?;
                Family::AsymptoticallySchwarzschild {
                    mass: p.m,
                    perturbation: p.perturbation,
                    inner_radius: p.inner_radius,
                }
            }
            "cone2d" => Family::Cone2D(parse(&raw.family, raw.params)?),
            "scaled" | "dilated" | "translated" => {
                let p: WrapParams = parse(&raw.family, raw.params)?;
                let base = Box::new(p.base);
                match raw.family.as_str() {
                    "translated" => Family::Translated {
                        base,
                        offset: p
                            .offset
                            .ok_or_else(|| Error::InvalidSpec("translated needs offset".into()))?,
                    },
                    other => {
                        let lambda = p
                            .lambda
                            .ok_or_else(|| Error::InvalidSpec(format!("{other} needs lambda")))?;
                        if other == "scaled" {
                            Family::Scaled { base, lambda }
                        } else {
                            Family::Dilated { base, lambda }
                        }
                    }
                }
            }
            "shell_conformal" => {
                let p: ShellParams = parse(&raw.family, raw.params)?;
                Family::ShellConformal(Arc::new(ShellFamily::new(
                    n, p.profile, p.index, p.nodes,
                )?))
            }
            other => return Err(Error::InvalidSpec(format!("unknown family '{other}'"))),
        };
        let derivative_mode = match raw.derivative_mode.as_str() {
            "analytic" => DerivativeMode::Analytic,
            "fd" => DerivativeMode::FiniteDifference { step: raw.fd_step },
            other => {
                return Err(Error::InvalidSpec(format!(
                    "unknown derivative_mode '{other}'"
                )))
            }
        };
        MetricSpec::new(n, family)?.with_derivative_mode(derivative_mode)
    }
}

impl From<MetricSpec> for RawSpec {
    fn from(spec: MetricSpec) -> RawSpec {
        let to_value = |v: &dyn erased::Ser| v.value();
        let (family, params) = match &spec.family {
            Family::Euclidean => ("euclidean", Value::Object(Default::default())),
            Family::Schwarzschild { mass, inner_radius } => (
                "schwarzschild",
                to_value(&MassParams {
                    m: *mass,
                    inner_radius: *inner_radius,
                }),
            ),
            Family::ConformallyFlat(f) => ("conformally_flat", to_value(f)),
            Family::AsymptoticallySchwarzschild {
                mass,
                perturbation,
                inner_radius,
            } => (
                "asymptotically_schwarzschild",
                to_value(&AsParams {
                    m: *mass,
                    perturbation: perturbation.clone(),
                    inner_radius: *inner_radius,
                }),
            ),
            Family::Cone2D(s) => ("cone2d", to_value(s)),
            Family::Scaled { base, lambda } => (
                "scaled",
                to_value(&WrapParams {
                    base: (**base).clone(),
                    lambda: Some(*lambda),
                    offset: None,
                }),
            ),
            Family::Dilated { base, lambda } => (
                "dilated",
                to_value(&WrapParams {
                    base: (**base).clone(),
                    lambda: Some(*lambda),
                    offset: None,
                }),
            ),
            Family::Translated { base, offset } => (
                "translated",
                to_value(&WrapParams {
                    base: (**base).clone(),
                    lambda: None,
                    offset: Some(offset.clone()),
                }),
            ),
            Family::ShellConformal(s) => (
                "shell_conformal",
                to_value(&ShellParams {
                    index: s.index(),
                    nodes: s.nodes(),
                    profile: s.profile().clone(),
                }),
            ),
        };
        let (derivative_mode, fd_step) = match spec.derivative_mode {
            DerivativeMode::Analytic => ("analytic".to_string(), None),
            DerivativeMode::FiniteDifference { step } => ("fd".to_string(), step),
        };
        RawSpec {
            n: spec.n,
            family: family.to_string(),
            params,
            derivative_mode,
            fd_step,
        }
    }
}

mod erased {
    use serde_json::Value;

    pub trait Ser {
        fn value(&self) -> Value;
    }

    impl<T: serde::Serialize> Ser for T {
        fn value(&self) -> Value {
            serde_json::to_value(self).expect("parameter serialization")
        }
    }
}

impl MetricSpec {
    pub fn new(n: usize, family: Family) -> Result<Self> {
        if !(2..=MAX_DIM).contains(&n) {
            return Err(Error::UnsupportedDimension(n));
        }
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidSpec(format!("{name} must be positive, got {v}")))
            }
        };
        let needs_n3 = || {
            if n < 3 {
                Err(Error::InvalidSpec(
                    "conformal families need dimension n >= 3".into(),
                ))
            } else {
                Ok(())
            }
        };
        match &family {
            Family::Euclidean => {}
            Family::Schwarzschild { mass, inner_radius }
            | Family::AsymptoticallySchwarzschild {
                mass, inner_radius, ..
            } => {
                needs_n3()?;
                if !mass.is_finite() || *inner_radius < 0.0 {
                    return Err(Error::InvalidSpec("bad Schwarzschild parameters".into()));
                }
            }
            Family::ConformallyFlat(f) => {
                needs_n3()?;
                match f {
                    ConformalFactor::Multipole { dipole, .. } if dipole.len() != n => {
                        return Err(Error::InvalidSpec(format!(
                            "dipole has {} entries, expected {n}",
                            dipole.len()
                        )))
                    }
                    ConformalFactor::Gaussian { width, .. } => positive("width", *width)?,
                    _ => {}
                }
            }
            Family::Cone2D(s) => {
                if n != 2 {
                    return Err(Error::InvalidSpec("cone2d requires n = 2".into()));
                }
                s.validate()?;
            }
            Family::Scaled { base, lambda } | Family::Dilated { base, lambda } => {
                positive("lambda", *lambda)?;
                if base.n != n {
                    return Err(Error::InvalidSpec("wrapped base has a different n".into()));
                }
            }
            Family::Translated { base, offset } => {
                if base.n != n || offset.len() != n {
                    return Err(Error::InvalidSpec("offset/base dimension mismatch".into()));
                }
            }
            Family::ShellConformal(s) => {
                needs_n3()?;
                if s.n() != n {
                    return Err(Error::InvalidSpec("shell family dimension mismatch".into()));
                }
            }
        }
        Ok(MetricSpec {
            n,
            family,
            derivative_mode: DerivativeMode::Analytic,
        })
    }

    pub fn with_derivative_mode(mut self, mode: DerivativeMode) -> Result<Self> {
        if let DerivativeMode::FiniteDifference { step: Some(h) } = mode {
            if !(h > 0.0 && h.is_finite()) {
                return Err(Error::InvalidSpec(format!("fd_step must be positive, got {h}")));
            }
        }
        self.derivative_mode = mode;
        Ok(self)
    }

    pub fn euclidean(n: usize) -> Self {
        MetricSpec::new(n, Family::Euclidean).expect("valid dimension")
    }

    pub fn schwarzschild(n: usize, mass: f64) -> Result<Self> {
        MetricSpec::new(
            n,
            Family::Schwarzschild {
                mass,
                inner_radius: 0.0,
            },
        )
    }

    pub fn conformally_flat(n: usize, factor: ConformalFactor) -> Result<Self> {
        MetricSpec::new(n, Family::ConformallyFlat(factor))
    }

    pub fn asymptotically_schwarzschild(n: usize, mass: f64, amplitude: f64) -> Result<Self> {
        MetricSpec::new(
            n,
            Family::AsymptoticallySchwarzschild {
                mass,
                perturbation: Perturbation {
                    amplitude,
                    order: None,
                },
                inner_radius: 0.0,
            },
        )
    }

    pub fn scaled(base: MetricSpec, lambda: f64) -> Result<Self> {
        let n = base.n;
        MetricSpec::new(
            n,
            Family::Scaled {
                base: Box::new(base),
                lambda,
            },
        )
    }

    pub fn translated(base: MetricSpec, offset: Vec<f64>) -> Result<Self> {
        let n = base.n;
        MetricSpec::new(
            n,
            Family::Translated {
                base: Box::new(base),
                offset,
            },
        )
    }

    pub fn dilated(base: MetricSpec, lambda: f64) -> Result<Self> {
        let n = base.n;
        MetricSpec::new(
            n,
            Family::Dilated {
                base: Box::new(base),
                lambda,
            },
        )
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn derivative_mode(&self) -> DerivativeMode {
        self.derivative_mode
    }

    /// Decay order `τ` of `g - δ` declared by the family, if any.
    pub fn decay_order(&self) -> Option<f64> {
        let n = self.n as f64;
        match &self.family {
            Family::Euclidean | Family::Cone2D(_) => None,
            Family::Schwarzschild { .. }
            | Family::AsymptoticallySchwarzschild { .. }
            | Family::ShellConformal(_) => Some(n - 2.0),
            Family::ConformallyFlat(f) => match f {
                ConformalFactor::Gaussian { .. } => None,
                _ => Some(n - 2.0),
            },
            Family::Scaled { base, .. }
            | Family::Translated { base, .. }
            | Family::Dilated { base, .. } => base.decay_order(),
        }
    }

    /// Whether the family is asymptotically Schwarzschild in its chart.
    pub fn is_asymptotically_schwarzschild(&self) -> bool {
        match &self.family {
            Family::Euclidean
            | Family::Schwarzschild { .. }
            | Family::AsymptoticallySchwarzschild { .. }
            | Family::ShellConformal(_) => true,
            Family::ConformallyFlat(_) => true,
            Family::Cone2D(_) => false,
            Family::Scaled { .. } => false,
            Family::Translated { base, .. } | Family::Dilated { base, .. } => {
                base.is_asymptotically_schwarzschild()
            }
        }
    }

    /// Whether the scalar curvature is known to vanish outside a bounded set.
    pub fn scalar_curvature_compactly_supported(&self) -> bool {
        match &self.family {
            Family::Euclidean | Family::Schwarzschild { .. } | Family::ShellConformal(_) => true,
            Family::ConformallyFlat(f) => !matches!(f, ConformalFactor::Gaussian { .. }),
            Family::Cone2D(s) => s.perturbation.is_none(),
            Family::AsymptoticallySchwarzschild { .. } => false,
            Family::Scaled { base, .. }
            | Family::Translated { base, .. }
            | Family::Dilated { base, .. } => base.scalar_curvature_compactly_supported(),
        }
    }

    /// Radius `s` such that every point with `|x| > s` is a regular chart
    /// point; zero for metrics smooth on all of ℝⁿ.
    pub fn singular_radius(&self) -> f64 {
        match &self.family {
            Family::Euclidean | Family::ShellConformal(_) => 0.0,
            Family::Schwarzschild { inner_radius, .. }
            | Family::AsymptoticallySchwarzschild { inner_radius, .. } => *inner_radius,
            Family::ConformallyFlat(_) | Family::Cone2D(_) => 0.0,
            Family::Scaled { base, .. } => base.singular_radius(),
            Family::Translated { base, offset } => {
                base.singular_radius() + offset.iter().map(|o| o * o).sum::<f64>().sqrt()
            }
            Family::Dilated { base, lambda } => lambda * base.singular_radius(),
        }
    }

    /// Inner radius of the region used for volume integrals: zero when the
    /// metric is smooth through the origin, otherwise a radius that keeps the
    /// excised ball well away from the coordinate singularity.
    pub fn excision_radius(&self) -> f64 {
        match &self.family {
            Family::Euclidean | Family::ShellConformal(_) => 0.0,
            Family::ConformallyFlat(f) => {
                if f.singular_at_origin() {
                    1.0
                } else {
                    0.0
                }
            }
            Family::Schwarzschild {
                mass, inner_radius, ..
            }
            | Family::AsymptoticallySchwarzschild {
                mass, inner_radius, ..
            } => {
                let horizon = (mass.abs() / 2.0).powf(1.0 / (self.n as f64 - 2.0));
                inner_radius.max(2.0 * horizon).max(1.0)
            }
            Family::Cone2D(_) => 1.0,
            Family::Scaled { base, .. } => base.excision_radius(),
            Family::Translated { base, offset } => {
                base.excision_radius().max(1e-300)
                    + offset.iter().map(|o| o * o).sum::<f64>().sqrt()
            }
            Family::Dilated { base, lambda } => lambda * base.excision_radius(),
        }
    }

    /// Radii at which the metric is less smooth or changes character; used
    /// as panel breaks in radial quadrature.
    pub fn radial_breakpoints(&self) -> Vec<f64> {
        match &self.family {
            Family::ShellConformal(s) => {
                let i = s.index() as f64;
                vec![0.5 * i, i]
            }
            Family::Scaled { base, .. } => base.radial_breakpoints(),
            Family::Dilated { base, lambda } => {
                base.radial_breakpoints().iter().map(|r| r * lambda).collect()
            }
            _ => Vec::new(),
        }
    }

    /// Signed distance to the excluded locus; non-positive means singular.
    pub fn boundary_distance(&self, x: &[f64]) -> f64 {
        let norm = |v: &[f64]| v.iter().map(|a| a * a).sum::<f64>().sqrt();
        match &self.family {
            Family::Euclidean | Family::ShellConformal(_) => f64::INFINITY,
            Family::Schwarzschild { inner_radius, .. }
            | Family::AsymptoticallySchwarzschild { inner_radius, .. } => norm(x) - inner_radius,
            Family::ConformallyFlat(f) => {
                if f.singular_at_origin() {
                    norm(x)
                } else {
                    f64::INFINITY
                }
            }
            Family::Cone2D(_) => norm(x),
            Family::Scaled { base, .. } => base.boundary_distance(x),
            Family::Translated { base, offset } => {
                let y: Vec<f64> = x.iter().zip(offset).map(|(a, b)| a + b).collect();
                base.boundary_distance(&y)
            }
            Family::Dilated { base, lambda } => {
                let y: Vec<f64> = x.iter().map(|a| a / lambda).collect();
                lambda * base.boundary_distance(&y)
            }
        }
    }

    /// The same metric expressed in an asymptotically flat chart: `Scaled`
    /// wrappers become `Dilated` ones.
    pub fn asymptotic_chart(&self) -> MetricSpec {
        let rebuilt = match &self.family {
            Family::Scaled { base, lambda } => {
                MetricSpec::dilated(base.asymptotic_chart(), *lambda)
            }
            Family::Translated { base, offset } => {
                let inner = base.asymptotic_chart();
                match inner.family {
                    Family::Dilated { base: b, lambda } => MetricSpec::translated(*b, offset.clone())
                        .and_then(|t| MetricSpec::dilated(t, lambda)),
                    _ => MetricSpec::translated(inner, offset.clone()),
                }
            }
            Family::Dilated { base, lambda } => {
                MetricSpec::dilated(base.asymptotic_chart(), *lambda)
            }
            _ => return self.clone(),
        };
        rebuilt
            .expect("rewrapping a valid spec")
            .with_derivative_mode(self.derivative_mode)
            .expect("mode already validated")
    }

    /// Whether the metric is `U^{4/(n-2)} δ` with `U` radial.
    pub fn is_radial_conformal(&self) -> bool {
        match &self.family {
            Family::Euclidean | Family::Schwarzschild { .. } | Family::ShellConformal(_) => true,
            Family::ConformallyFlat(f) => f.is_radial(),
            _ => false,
        }
    }

    /// Conformal factor `U` as a jet, when the metric is conformally flat in
    /// its chart.
    pub fn conformal_factor(&self, x: &[Jet]) -> Option<Jet> {
        let n = self.n as f64;
        match &self.family {
            Family::Euclidean => Some(Jet::constant(x[0].dim(), 1.0)),
            Family::Schwarzschild { mass, .. } => {
                Some(norm_sq(x).powf((2.0 - n) / 2.0) * (mass / 2.0) + 1.0)
            }
            Family::ConformallyFlat(f) => Some(f.eval(self.n, x)),
            Family::ShellConformal(s) => Some(s.potential().u_jet(x)),
            _ => None,
        }
    }

    fn raw_components(&self, x: &[Jet]) -> Result<Vec<Jet>> {
        let n = self.n;
        let dim = x.iter().map(Jet::dim).max().unwrap_or(0);
        let conformal = |u: Jet| -> Result<Vec<Jet>> {
            if u.value <= 0.0 {
                return Err(Error::NotPositiveDefinite {
                    point: x.iter().map(|j| j.value).collect(),
                });
            }
            let phi = u.powf(4.0 / (n as f64 - 2.0));
            Ok(diagonal(n, dim, phi))
        };
        match &self.family {
            Family::Euclidean => Ok(diagonal(n, dim, Jet::constant(dim, 1.0))),
            Family::Schwarzschild { .. }
            | Family::ConformallyFlat(_)
            | Family::ShellConformal(_) => {
                conformal(self.conformal_factor(x).expect("conformal family"))
            }
            Family::AsymptoticallySchwarzschild {
                mass, perturbation, ..
            } => {
                let u = norm_sq(x).powf((2.0 - n as f64) / 2.0) * (mass / 2.0) + 1.0;
                let mut comps = conformal(u)?;
                perturbation.add_to(n, x, &mut comps);
                Ok(comps)
            }
            Family::Cone2D(surface) => surface.cartesian_components(x),
            Family::Scaled { base, lambda } => {
                let l2 = lambda * lambda;
                Ok(base.components(x)?.into_iter().map(|c| c * l2).collect())
            }
            Family::Translated { base, offset } => {
                let y: Vec<Jet> = x.iter().zip(offset).map(|(a, b)| *a + *b).collect();
                base.components(&y)
            }
            Family::Dilated { base, lambda } => {
                let y: Vec<Jet> = x.iter().map(|a| *a * (1.0 / lambda)).collect();
                base.components(&y)
            }
        }
    }
}

fn diagonal(n: usize, dim: usize, d: Jet) -> Vec<Jet> {
    let zero = Jet::constant(dim, 0.0);
    let mut out = vec![zero; n * n];
    for i in 0..n {
        out[i * n + i] = d;
    }
    out
}

impl ChartMetric for MetricSpec {
    fn dim(&self) -> usize {
        self.n
    }

    fn boundary_distance(&self, x: &[f64]) -> f64 {
        MetricSpec::boundary_distance(self, x)
    }

    fn components(&self, x: &[Jet]) -> Result<Vec<Jet>> {
        if x.len() != self.n {
            return Err(Error::InvalidInput(format!(
                "point has {} coordinates, metric dimension is {}",
                x.len(),
                self.n
            )));
        }
        let values: Vec<f64> = x.iter().map(|j| j.value).collect();
        if !(self.boundary_distance(&values) > 0.0) {
            return Err(Error::SingularPoint { point: values });
        }
        self.raw_components(x)
    }
}

fn check_positive_definite(n: usize, g: &[f64], x: &[f64]) -> Result<()> {
    if g.iter().any(|v| !v.is_finite()) || tensor::spd_determinant(n, g).is_none() {
        return Err(Error::NotPositiveDefinite { point: x.to_vec() });
    }
    Ok(())
}

/// Metric components `g_ij(x)`.
pub fn metric_at(spec: &(impl ChartMetric + ?Sized), x: &[f64]) -> Result<DMatrix<f64>> {
    let n = spec.dim();
    let comps = spec.components(&Jet::constants(x))?;
    let g: Vec<f64> = comps.iter().map(|c| c.value).collect();
    check_positive_definite(n, &g, x)?;
    Ok(DMatrix::from_row_slice(n, n, &g))
}

/// Default finite-difference step `ε^{1/3} · max(1, |x|)`.
pub fn default_fd_step(x: &[f64]) -> f64 {
    let norm = x.iter().map(|a| a * a).sum::<f64>().sqrt();
    f64::EPSILON.cbrt() * norm.max(1.0)
}

/// Metric and chart derivatives up to `order` (1 or 2).
pub fn metric_derivatives_at(
    spec: &MetricSpec,
    x: &[f64],
    order: usize,
) -> Result<MetricDerivatives> {
    if !(1..=2).contains(&order) {
        return Err(Error::InvalidInput(format!(
            "derivative order must be 1 or 2, got {order}"
        )));
    }
    match spec.derivative_mode {
        DerivativeMode::Analytic => analytic_derivatives(spec, x, order == 2),
        DerivativeMode::FiniteDifference { step } => {
            let h = step.unwrap_or_else(|| default_fd_step(x));
            finite_difference_derivatives(spec, x, order == 2, h)
        }
    }
}

/// Exact derivatives through jets, regardless of the spec's mode.
pub fn analytic_derivatives(
    spec: &(impl ChartMetric + ?Sized),
    x: &[f64],
    second: bool,
) -> Result<MetricDerivatives> {
    let n = spec.dim();
    let comps = spec.components(&Jet::point(x))?;
    let md = MetricDerivatives::from_jets(n, &comps, second);
    check_positive_definite(n, &md.g, x)?;
    Ok(md)
}

/// Central-difference derivatives with step `h`.
pub fn finite_difference_derivatives(
    spec: &MetricSpec,
    x: &[f64],
    second: bool,
    h: f64,
) -> Result<MetricDerivatives> {
    let n = spec.n;
    if spec.boundary_distance(x) <= 2.0 * h {
        return Err(Error::StepTooLarge {
            step: h,
            point: x.to_vec(),
        });
    }
    let mut md = tensor::central_differences(n, x, h, |y| {
        let g = metric_at(spec, y).map_err(|e| match e {
            Error::SingularPoint { .. } | Error::NotPositiveDefinite { .. } if y != x => {
                Error::StepTooLarge {
                    step: h,
                    point: x.to_vec(),
                }
            }
            other => other,
        })?;
        Ok(g.transpose().as_slice().to_vec())
    })?;
    if !second {
        md.ddg = None;
    }
    Ok(md)
}

/// Christoffel symbols, Ricci tensor and scalar curvature at `x`.
pub fn curvature_at(spec: &MetricSpec, x: &[f64]) -> Result<PointwiseCurvature> {
    let md = metric_derivatives_at(spec, x, 2)?;
    tensor::curvature(&md).map_err(|e| match e {
        Error::NotPositiveDefinite { .. } => Error::NotPositiveDefinite { point: x.to_vec() },
        other => other,
    })
}

/// A conformal factor restricted to a hypersurface, with its tangential
/// Laplacian and squared tangential gradient taken in the base metric.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TangentialFactor {
    pub value: f64,
    pub laplacian: f64,
    pub grad_sq: f64,
}

/// Scalar curvature of `U^{4/(n-2)} g₁` on a hypersurface of dimension
/// `hyper_dim = n - 1`, given the scalar curvature of `g₁`:
/// `e^{-2ψ}(R₁ − 2(n−2)Δψ − (n−3)(n−2)|dψ|²)` with `e^{2ψ} = U^{4/(n−2)}`.
pub fn conformal_scalar_curvature_hypersurface(
    factor: &TangentialFactor,
    base_scalar: f64,
    hyper_dim: usize,
) -> Result<f64> {
    if !(factor.value > 0.0) {
        return Err(Error::NonPositiveConformalFactor(factor.value));
    }
    if hyper_dim < 2 {
        return Err(Error::UnsupportedDimension(hyper_dim + 1));
    }
    let n = hyper_dim as f64 + 1.0;
    let u = factor.value;
    let c = 2.0 / (n - 2.0);
    let psi = c * u.ln();
    let lap_psi = c * (factor.laplacian / u - factor.grad_sq / (u * u));
    let grad_psi_sq = c * c * factor.grad_sq / (u * u);
    Ok((-2.0 * psi).exp()
        * (base_scalar - 2.0 * (n - 2.0) * lap_psi - (n - 3.0) * (n - 2.0) * grad_psi_sq))
}
