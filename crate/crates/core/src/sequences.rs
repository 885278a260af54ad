//! Convergence sequences: matter shells with their radial potential,
//! blow-ups and escaping points, compared on fixed chart windows.

use std::sync::Arc;

use nalgebra::{Cholesky, DMatrix};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::{self, MassEstimate};
use crate::jet::{norm_sq, Jet};
use crate::mass;
use crate::metric::{self, ChartMetric, Family, MetricSpec};
use crate::quadrature::{adaptive, unit_sphere_area, Chebyshev};

/// Fewest Chebyshev nodes accepted across the support `[i/2, i]`.
pub const MIN_SHELL_NODES: usize = 32;

/// Radial bump supported in `[1/2, 1]`, normalized per dimension so that
/// `∫_{ℝⁿ} ρ = 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BumpProfile {
    /// `(1 − (4(s − 3/4))²)^power`
    Polynomial { power: u32 },
}

impl Default for BumpProfile {
    fn default() -> Self {
        BumpProfile::Polynomial { power: 3 }
    }
}

impl BumpProfile {
    /// Unnormalized profile.
    pub fn raw(&self, s: f64) -> f64 {
        match self {
            BumpProfile::Polynomial { power } => {
                if !(0.5..=1.0).contains(&s) {
                    return 0.0;
                }
                let t = 4.0 * (s - 0.75);
                (1.0 - t * t).max(0.0).powi(*power as i32)
            }
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            BumpProfile::Polynomial { power } if *power >= 2 => Ok(()),
            BumpProfile::Polynomial { power } => Err(Error::InvalidSpec(format!(
                "bump power must be at least 2 for a C² potential, got {power}"
            ))),
        }
    }
}

/// Radial solution `v_i` of `Δv = −ρ_i` with `v → 0` at infinity, where
/// `ρ_i(x) = i^{−n} ρ(x/i)`.
#[derive(Clone, Debug)]
pub struct ShellPotential {
    n: usize,
    index: f64,
    profile: BumpProfile,
    normalization: f64,
    /// `a` in `v = a r^{2−n}` outside the support.
    tail: f64,
    /// `M(r) = ∫_{i/2}^r s^{n−1} ρ_i(s) ds` on `[i/2, i]`.
    enclosed: Chebyshev,
    /// `v` on `[i/2, i]`.
    annulus: Chebyshev,
    hollow: f64,
}

impl ShellPotential {
    pub fn solve(n: usize, profile: &BumpProfile, index: u32, nodes: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::UnsupportedDimension(n));
        }
        if index == 0 {
            return Err(Error::InvalidInput("shell index starts at 1".into()));
        }
        if nodes < MIN_SHELL_NODES {
            return Err(Error::GridTooCoarse {
                nodes,
                required: MIN_SHELL_NODES,
            });
        }
        profile.validate()?;
        let nf = n as f64;
        let omega = unit_sphere_area(n);
        let normalization = omega
            * adaptive(&|s: f64| s.powf(nf - 1.0) * profile.raw(s), 0.5, 1.0, 1e-16);
        let i = index as f64;
        let (lo, hi) = (0.5 * i, i);
        let density = |r: f64| i.powf(-nf) * profile.raw(r / i) / normalization;

        let enclosed = Chebyshev::fit(lo, hi, nodes, |r| {
            adaptive(&|s: f64| s.powf(nf - 1.0) * density(s), lo, r, 1e-17)
        });
        let tail = 1.0 / ((nf - 2.0) * omega);
        let at_outer = tail * hi.powf(2.0 - nf);
        let annulus = Chebyshev::fit(lo, hi, nodes, |r| {
            at_outer + adaptive(&|s: f64| s.powf(1.0 - nf) * enclosed.eval(s), r, hi, 1e-17)
        });
        let hollow = annulus.eval(lo);
        let potential = ShellPotential {
            n,
            index: i,
            profile: profile.clone(),
            normalization,
            tail,
            enclosed,
            annulus,
            hollow,
        };
        let u_min = 1.0 + potential.hollow.min(0.0).min(potential.tail.min(0.0));
        if !(u_min > 0.0) {
            return Err(Error::NonPositiveU(u_min));
        }
        Ok(potential)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Coefficient `a` of the exterior solution `a r^{2−n}`.
    pub fn tail_coefficient(&self) -> f64 {
        self.tail
    }

    /// `ρ_i(r)`.
    pub fn density(&self, r: f64) -> f64 {
        let nf = self.n as f64;
        self.index.powf(-nf) * self.profile.raw(r / self.index) / self.normalization
    }

    /// `v, v', v''` at radius `r`.
    pub fn radial(&self, r: f64) -> (f64, f64, f64) {
        let nf = self.n as f64;
        let (lo, hi) = (0.5 * self.index, self.index);
        if r < lo {
            (self.hollow, 0.0, 0.0)
        } else if r >= hi {
            let a = self.tail;
            (
                a * r.powf(2.0 - nf),
                (2.0 - nf) * a * r.powf(1.0 - nf),
                (2.0 - nf) * (1.0 - nf) * a * r.powf(-nf),
            )
        } else {
            let dv = -r.powf(1.0 - nf) * self.enclosed.eval(r);
            let ddv = -(nf - 1.0) * dv / r - self.density(r);
            (self.annulus.eval(r), dv, ddv)
        }
    }

    pub fn v(&self, r: f64) -> f64 {
        self.radial(r).0
    }

    /// `u = 1 + v(|x|)` as a jet.
    pub fn u_jet(&self, x: &[Jet]) -> Jet {
        let r2 = norm_sq(x);
        let lo = 0.5 * self.index;
        if r2.value < lo * lo {
            // constant inside the hollow; avoids the square root at the origin
            return Jet::constant(r2.dim(), 1.0 + self.hollow);
        }
        if r2.value >= self.index * self.index {
            let nf = self.n as f64;
            return r2.powf((2.0 - nf) / 2.0) * self.tail + 1.0;
        }
        let r = r2.sqrt();
        let (v, dv, ddv) = self.radial(r.value);
        r.chain(v, dv, ddv) + 1.0
    }
}

/// One member `g_i = u_i^{4/(n−2)} δ` of the matter-shell sequence.
#[derive(Clone, Debug)]
pub struct ShellFamily {
    index: u32,
    nodes: usize,
    potential: ShellPotential,
}

impl ShellFamily {
    pub fn new(n: usize, profile: BumpProfile, index: u32, nodes: usize) -> Result<Self> {
        Ok(ShellFamily {
            index,
            nodes,
            potential: ShellPotential::solve(n, &profile, index, nodes)?,
        })
    }

    pub fn n(&self) -> usize {
        self.potential.n
    }

    pub fn index(&self) -> u32 {
        self.index
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn profile(&self) -> &BumpProfile {
        &self.potential.profile
    }

    pub fn potential(&self) -> &ShellPotential {
        &self.potential
    }
}

/// Metric spec of a shell family member.
pub fn shell_metric(family: Arc<ShellFamily>) -> Result<MetricSpec> {
    let n = family.n();
    MetricSpec::new(n, Family::ShellConformal(family))
}

/// Shell metric with the default profile and 64 nodes.
pub fn default_shell(n: usize, index: u32) -> Result<MetricSpec> {
    shell_metric(Arc::new(ShellFamily::new(
        n,
        BumpProfile::default(),
        index,
        64,
    )?))
}

/// Metric, first and second derivatives sampled on the grid of a cube
/// `[−L, L]ⁿ`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WindowSample {
    pub label: String,
    pub n: usize,
    pub half_width: f64,
    pub resolution: usize,
    pub points: Vec<Vec<f64>>,
    pub g: Vec<Vec<f64>>,
    pub dg: Vec<Vec<f64>>,
    pub ddg: Vec<Vec<f64>>,
}

/// `Aᵀ g(p + A x / scale) A` for a fixed frame `A`.
struct FramedChart<'a, M: ChartMetric + ?Sized> {
    base: &'a M,
    center: Vec<f64>,
    frame: DMatrix<f64>,
    scale: f64,
}

impl<M: ChartMetric + ?Sized> FramedChart<'_, M> {
    fn position(&self, x: &[f64]) -> Vec<f64> {
        let n = self.center.len();
        (0..n)
            .map(|i| {
                self.center[i]
                    + (0..n).map(|j| self.frame[(i, j)] * x[j]).sum::<f64>() / self.scale
            })
            .collect()
    }
}

impl<M: ChartMetric + ?Sized> ChartMetric for FramedChart<'_, M> {
    fn dim(&self) -> usize {
        self.center.len()
    }

    fn components(&self, x: &[Jet]) -> Result<Vec<Jet>> {
        let n = self.center.len();
        let dim = x.iter().map(Jet::dim).max().unwrap_or(0);
        let y: Vec<Jet> = (0..n)
            .map(|i| {
                let mut acc = Jet::constant(dim, self.center[i]);
                for j in 0..n {
                    acc = acc + x[j] * (self.frame[(i, j)] / self.scale);
                }
                acc
            })
            .collect();
        let g = self.base.components(&y)?;
        let mut out = vec![Jet::constant(dim, 0.0); n * n];
        for a in 0..n {
            for b in a..n {
                let mut acc = Jet::constant(dim, 0.0);
                for i in 0..n {
                    for j in 0..n {
                        let c = self.frame[(i, a)] * self.frame[(j, b)];
                        if c != 0.0 {
                            acc = acc + g[i * n + j] * c;
                        }
                    }
                }
                out[a * n + b] = acc;
                out[b * n + a] = acc;
            }
        }
        Ok(out)
    }

    fn boundary_distance(&self, x: &[f64]) -> f64 {
        self.base.boundary_distance(&self.position(x))
    }
}

/// `A = L^{−T}` for `g(p) = L Lᵀ`, so that `Aᵀ g(p) A = I`.
fn normalizing_frame(base: &(impl ChartMetric + ?Sized), p: &[f64]) -> Result<DMatrix<f64>> {
    let g = metric::metric_at(base, p)?;
    let chol = Cholesky::new(g).ok_or_else(|| Error::NotPositiveDefinite { point: p.to_vec() })?;
    chol.l()
        .transpose()
        .try_inverse()
        .ok_or_else(|| Error::NotPositiveDefinite { point: p.to_vec() })
}

fn grid_points(n: usize, half_width: f64, resolution: usize) -> Vec<Vec<f64>> {
    let axis: Vec<f64> = (0..resolution)
        .map(|k| -half_width + 2.0 * half_width * k as f64 / (resolution - 1) as f64)
        .collect();
    let total = resolution.pow(n as u32);
    (0..total)
        .map(|mut idx| {
            (0..n)
                .map(|_| {
                    let v = axis[idx % resolution];
                    idx /= resolution;
                    v
                })
                .collect()
        })
        .collect()
}

fn sample(
    chart: &(impl ChartMetric + ?Sized),
    label: String,
    half_width: f64,
    resolution: usize,
) -> Result<WindowSample> {
    let n = chart.dim();
    if resolution < 2 {
        return Err(Error::InvalidInput("window resolution must be at least 2".into()));
    }
    if !(half_width > 0.0 && half_width.is_finite()) {
        return Err(Error::InvalidInput("window half-width must be positive".into()));
    }
    let points = grid_points(n, half_width, resolution);
    let derivs: Result<Vec<_>> = points
        .par_iter()
        .map(|x| {
            if !(chart.boundary_distance(x) > 0.0) {
                return Err(Error::WindowExitsChart(format!("{label}: grid point {x:?}")));
            }
            metric::analytic_derivatives(chart, x, true).map_err(|e| match e {
                Error::SingularPoint { point } | Error::NotPositiveDefinite { point } => {
                    Error::WindowExitsChart(format!("{label}: grid point {point:?}"))
                }
                other => other,
            })
        })
        .collect();
    let derivs = derivs?;
    Ok(WindowSample {
        label,
        n,
        half_width,
        resolution,
        g: derivs.iter().map(|d| d.g.clone()).collect(),
        dg: derivs.iter().map(|d| d.dg.clone()).collect(),
        ddg: derivs
            .iter()
            .map(|d| d.ddg.clone().expect("second derivatives requested"))
            .collect(),
        points,
    })
}

/// Window of `(M, scale² g, p)` in normalized coordinates:
/// `ĝ(x) = Aᵀ g(p + A x/scale) A` with `Aᵀ g(p) A = I`.
pub fn blow_up_window(
    base: &(impl ChartMetric + ?Sized),
    p: &[f64],
    scale: f64,
    half_width: f64,
    resolution: usize,
) -> Result<WindowSample> {
    if p.len() != base.dim() {
        return Err(Error::InvalidInput("center has the wrong dimension".into()));
    }
    if !(scale > 0.0) {
        return Err(Error::InvalidInput("blow-up scale must be positive".into()));
    }
    let frame = normalizing_frame(base, p)?;
    let reach = frame.norm() * half_width * (base.dim() as f64).sqrt() / scale;
    if !(base.boundary_distance(p) > reach) {
        return Err(Error::WindowExitsChart(format!(
            "ball of radius {reach} around {p:?} leaves the chart"
        )));
    }
    let chart = FramedChart {
        base,
        center: p.to_vec(),
        frame,
        scale,
    };
    sample(&chart, format!("blow-up x{scale}"), half_width, resolution)
}

/// Windows of the translated metrics `g(· + p_i)`, without normalization.
pub fn escaping_window(
    base: &(impl ChartMetric + ?Sized),
    offsets: &[Vec<f64>],
    half_width: f64,
    resolution: usize,
) -> Result<Vec<WindowSample>> {
    let n = base.dim();
    offsets
        .iter()
        .map(|p| {
            let chart = FramedChart {
                base,
                center: p.clone(),
                frame: DMatrix::identity(n, n),
                scale: 1.0,
            };
            sample(&chart, format!("escaping {p:?}"), half_width, resolution)
        })
        .collect()
}

/// Escaping windows normalized by `g(p_i)` as in [`blow_up_window`] with
/// unit scale.
pub fn normalized_escaping_window(
    base: &(impl ChartMetric + ?Sized),
    offsets: &[Vec<f64>],
    half_width: f64,
    resolution: usize,
) -> Result<Vec<WindowSample>> {
    offsets
        .iter()
        .map(|p| blow_up_window(base, p, 1.0, half_width, resolution))
        .collect()
}

/// Window of the metric itself around `center`.
pub fn plain_window(
    base: &(impl ChartMetric + ?Sized),
    center: &[f64],
    half_width: f64,
    resolution: usize,
) -> Result<WindowSample> {
    let n = base.dim();
    let chart = FramedChart {
        base,
        center: center.to_vec(),
        frame: DMatrix::identity(n, n),
        scale: 1.0,
    };
    sample(&chart, format!("window at {center:?}"), half_width, resolution)
}

/// The flat reference window.
pub fn identity_window(n: usize, half_width: f64, resolution: usize) -> Result<WindowSample> {
    let mut w = plain_window(&MetricSpec::euclidean(n), &vec![0.0; n], half_width, resolution)?;
    w.label = "identity".into();
    Ok(w)
}

/// Largest difference over grid points, components and derivative orders
/// 0 to 2.
pub fn c2_window_distance(sample: &WindowSample, reference: &WindowSample) -> Result<f64> {
    if sample.n != reference.n
        || sample.resolution != reference.resolution
        || sample.half_width != reference.half_width
        || sample.points.len() != reference.points.len()
    {
        return Err(Error::GridMismatch(format!(
            "'{}' and '{}' use different grids",
            sample.label, reference.label
        )));
    }
    let max_diff = |a: &[Vec<f64>], b: &[Vec<f64>]| {
        a.iter()
            .zip(b)
            .flat_map(|(x, y)| x.iter().zip(y).map(|(u, v)| (u - v).abs()))
            .fold(0.0, f64::max)
    };
    Ok(max_diff(&sample.g, &reference.g)
        .max(max_diff(&sample.dg, &reference.dg))
        .max(max_diff(&sample.ddg, &reference.ddg)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    BlowUp,
    Escaping,
    Shells,
    /// The same metric at every index.
    Constant,
}

fn default_resolution() -> usize {
    5
}
fn default_spacing() -> f64 {
    10.0
}
fn default_q() -> usize {
    32
}
fn default_radii() -> Vec<f64> {
    vec![50.0, 100.0, 200.0, 400.0]
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub n: usize,
    pub indices: Vec<u32>,
    /// Window half-width; 0.2 for shells and 1 otherwise when absent.
    #[serde(rename = "window_L", default, skip_serializing_if = "Option::is_none")]
    pub window_l: Option<f64>,
    #[serde(default = "default_resolution")]
    pub resolution: usize,
    /// Base metric; Schwarzschild with unit mass when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<MetricSpec>,
    /// Blow-up center; `(10, 0, …)` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point: Option<Vec<f64>>,
    /// Escaping offsets are `(spacing · i, 0, …)`.
    #[serde(default = "default_spacing")]
    pub spacing: f64,
    #[serde(default = "default_q")]
    pub q: usize,
    /// Flux radii for per-index masses, scaled with the index where needed.
    #[serde(default = "default_radii")]
    pub radii: Vec<f64>,
}

impl ExperimentConfig {
    /// Shell windows sit inside the hollow core of the first shell.
    pub fn window(&self) -> f64 {
        self.window_l.unwrap_or(if self.kind == ExperimentKind::Shells {
            0.2
        } else {
            1.0
        })
    }

    pub fn new(kind: ExperimentKind, n: usize, indices: Vec<u32>) -> Self {
        ExperimentConfig {
            kind,
            n,
            indices,
            window_l: None,
            resolution: default_resolution(),
            metric: None,
            point: None,
            spacing: default_spacing(),
            q: default_q(),
            radii: default_radii(),
        }
    }
}

/// Per-index masses, window distances to the limit and the semicontinuity
/// verdict.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub label: String,
    pub indices: Vec<u32>,
    pub masses: Vec<f64>,
    pub mass_errors: Vec<f64>,
    pub limit_label: String,
    pub limit_mass: f64,
    /// Abscissa of the convergence fit: the index, or `|p_i|` for
    /// escaping points.
    pub scales: Vec<f64>,
    pub distances: Vec<f64>,
    /// `−d ln(distance)/d ln(scale)`; absent when some distance vanishes.
    pub fitted_exponent: Option<f64>,
    pub nominal_exponent: Option<f64>,
    /// First index from which the distances are nonincreasing.
    pub nonincreasing_from: Option<u32>,
    pub masses_unbounded: bool,
    /// Minimum over the second half of the indices; absent when unbounded.
    pub liminf_mass: Option<f64>,
    /// `liminf − limit`; absent when the masses are unbounded.
    #[serde(rename = "drop")]
    pub mass_drop: Option<f64>,
    pub verdict: bool,
}

/// One row of the experiment CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRow {
    pub index: u32,
    pub mass: f64,
    pub distance: f64,
}

impl ExperimentReport {
    pub fn rows(&self) -> Vec<ExperimentRow> {
        self.indices
            .iter()
            .zip(&self.masses)
            .zip(&self.distances)
            .map(|((&index, &mass), &distance)| ExperimentRow {
                index,
                mass,
                distance,
            })
            .collect()
    }
}

/// Inputs gathered by an experiment before the verdict is drawn.
pub struct ExperimentData {
    pub label: String,
    pub indices: Vec<u32>,
    pub masses: Vec<MassEstimate>,
    pub limit_label: String,
    pub limit_mass: MassEstimate,
    pub scales: Vec<f64>,
    pub distances: Vec<f64>,
    pub nominal_exponent: Option<f64>,
}

/// Draw the verdict `liminf m_i ≥ m_limit` from per-index data.
pub fn assemble_report(data: ExperimentData) -> ExperimentReport {
    let values: Vec<f64> = data.masses.iter().map(|m| m.value).collect();
    let errors: Vec<f64> = data.masses.iter().map(|m| m.error).collect();
    let idx: Vec<f64> = data.indices.iter().map(|&i| i as f64).collect();
    let increasing = values.windows(2).all(|w| w[1] > w[0]);
    let growth = fit::log_log_slope(&idx, &values);
    let unbounded = values.len() >= 3 && increasing && growth.is_some_and(|s| s > 0.5);

    let tail = &values[values.len() / 2..];
    let tail_err = errors[values.len() / 2..]
        .iter()
        .fold(data.limit_mass.error, |a, &b| a.max(b));
    let tolerance = tail_err + 1e-9;
    let (liminf, mass_drop, verdict) = if unbounded {
        (None, None, true)
    } else {
        let liminf = tail.iter().copied().fold(f64::INFINITY, f64::min);
        let d = liminf - data.limit_mass.value;
        // differences within the estimation error count as equality
        let d = if d.abs() <= tolerance { 0.0 } else { d };
        (Some(liminf), Some(d), d >= 0.0)
    };

    let fitted_exponent = fit::log_log_slope(&data.scales, &data.distances).map(|s| -s);
    let mut start = data.distances.len().saturating_sub(1);
    while start > 0 && data.distances[start - 1] >= data.distances[start] {
        start -= 1;
    }
    ExperimentReport {
        label: data.label,
        nonincreasing_from: data.indices.get(start).copied(),
        indices: data.indices,
        masses: values,
        mass_errors: errors,
        limit_label: data.limit_label,
        limit_mass: data.limit_mass.value,
        scales: data.scales,
        distances: data.distances,
        fitted_exponent,
        nominal_exponent: data.nominal_exponent,
        masses_unbounded: unbounded,
        liminf_mass: liminf,
        mass_drop,
        verdict,
    }
}

fn scaled_radii(radii: &[f64], factor: f64) -> Vec<f64> {
    radii.iter().map(|r| r * factor.max(1.0)).collect()
}

/// Run one of the built-in convergence experiments.
pub fn run_semicontinuity_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let n = config.n;
    if config.indices.is_empty() || config.indices.contains(&0) {
        return Err(Error::InvalidInput("indices must be a nonempty list of positive integers".into()));
    }
    if config.indices.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("indices must be strictly increasing".into()));
    }
    fit::validate_radii(&config.radii)?;
    let base = match &config.metric {
        Some(m) if m.n() != n => {
            return Err(Error::InvalidInput("metric dimension differs from n".into()))
        }
        Some(m) => m.clone(),
        None => MetricSpec::schwarzschild(n, 1.0)?,
    };
    let (l, res, q) = (config.window(), config.resolution, config.q);
    let identity = identity_window(n, l, res)?;
    let euclid_mass = mass::adm_mass(&MetricSpec::euclidean(n), &config.radii, q)?;
    let indices = config.indices.clone();

    let data = match config.kind {
        ExperimentKind::BlowUp => {
            let p = config.point.clone().unwrap_or_else(|| {
                let mut p = vec![0.0; n];
                p[0] = 10.0;
                p
            });
            let per_index: Result<Vec<(MassEstimate, f64)>> = indices
                .iter()
                .map(|&i| {
                    let s = i as f64;
                    let scaled = MetricSpec::scaled(base.clone(), s)?;
                    let m = mass::adm_mass(&scaled, &scaled_radii(&config.radii, s), q)?;
                    let w = blow_up_window(&base, &p, s, l, res)?;
                    Ok((m, c2_window_distance(&w, &identity)?))
                })
                .collect();
            let (masses, distances): (Vec<_>, Vec<_>) = per_index?.into_iter().unzip();
            ExperimentData {
                label: format!("blow-up of n={n} metric at {p:?}"),
                scales: indices.iter().map(|&i| i as f64).collect(),
                indices,
                masses,
                limit_label: "euclidean".into(),
                limit_mass: euclid_mass,
                distances,
                nominal_exponent: Some(1.0),
            }
        }
        ExperimentKind::Escaping => {
            let offsets: Vec<Vec<f64>> = indices
                .iter()
                .map(|&i| {
                    let mut p = vec![0.0; n];
                    p[0] = config.spacing * i as f64;
                    p
                })
                .collect();
            let windows = escaping_window(&base, &offsets, l, res)?;
            let masses = offsets
                .iter()
                .map(|p| {
                    let t = MetricSpec::translated(base.clone(), p.clone())?;
                    let factor = 4.0 * p[0].abs() / config.radii[0];
                    mass::adm_mass(&t, &scaled_radii(&config.radii, factor), q)
                })
                .collect::<Result<Vec<_>>>()?;
            let distances = windows
                .iter()
                .map(|w| c2_window_distance(w, &identity))
                .collect::<Result<Vec<_>>>()?;
            ExperimentData {
                label: format!("escaping points of n={n} metric, spacing {}", config.spacing),
                scales: offsets.iter().map(|p| p[0].abs()).collect(),
                indices,
                masses,
                limit_label: "euclidean".into(),
                limit_mass: euclid_mass,
                distances,
                nominal_exponent: base.decay_order(),
            }
        }
        ExperimentKind::Shells => {
            let per_index: Result<Vec<(MassEstimate, f64)>> = indices
                .iter()
                .map(|&i| {
                    let spec = default_shell(n, i)?;
                    let factor = 2.0 * i as f64 / config.radii[0];
                    let m = mass::adm_mass(&spec, &scaled_radii(&config.radii, factor), q)?;
                    let w = plain_window(&spec, &vec![0.0; n], l, res)?;
                    Ok((m, c2_window_distance(&w, &identity)?))
                })
                .collect();
            let (masses, distances): (Vec<_>, Vec<_>) = per_index?.into_iter().unzip();
            ExperimentData {
                label: format!("matter shells, n={n}"),
                scales: indices.iter().map(|&i| i as f64).collect(),
                indices,
                masses,
                limit_label: "euclidean".into(),
                limit_mass: euclid_mass,
                distances,
                nominal_exponent: Some(n as f64 - 2.0),
            }
        }
        ExperimentKind::Constant => {
            let m = mass::adm_mass(&base, &config.radii, q)?;
            let center = config.point.clone().unwrap_or_else(|| {
                let mut p = vec![0.0; n];
                p[0] = 10.0;
                p
            });
            let w = plain_window(&base, &center, l, res)?;
            let d = c2_window_distance(&w, &w)?;
            ExperimentData {
                label: format!("constant sequence of n={n} metric"),
                scales: indices.iter().map(|&i| i as f64).collect(),
                masses: vec![m.clone(); indices.len()],
                distances: vec![d; indices.len()],
                indices,
                limit_label: "same metric".into(),
                limit_mass: m,
                nominal_exponent: None,
            }
        }
    };
    Ok(assemble_report(data))
}
