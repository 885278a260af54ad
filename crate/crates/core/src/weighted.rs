//! Weighted sup-seminorms on the asymptotic region, the divergence-form
//! operator `𝒟(g) = ∂_i∂_j g_ij − ∂_j∂_j g_ii`, and volume integrals giving
//! the ADM mass and the matter term.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::{self, MassEstimate};
use crate::jet::{Jet, ScalarField};
use crate::mass;
use crate::metric::{self, ChartMetric, MetricSpec};
use crate::quadrature::{unit_sphere_area, Rule};
use crate::sphere::SphericalChart;
use crate::tensor;

/// Angular node budget for volume integrals and sup grids.
pub const VOLUME_NODE_BUDGET: usize = 2000;

/// Gauss–Legendre points per radial panel.
const RADIAL_ORDER: usize = 16;

/// Relative size of the extrapolated tail above which a divergence-form
/// mass is rejected.
const MAX_TAIL_FRACTION: f64 = 0.1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedNormParams {
    /// Highest derivative order, 0 to 2.
    pub k: usize,
    pub tau: f64,
    /// The grid covers `|x| ≥ inner_radius`.
    pub inner_radius: f64,
    #[serde(default = "default_per_decade")]
    pub per_decade: usize,
    #[serde(default = "default_decades")]
    pub decades: usize,
    /// Angular resolution of the grid.
    #[serde(default = "default_angular")]
    pub q: usize,
}

fn default_per_decade() -> usize {
    64
}
fn default_decades() -> usize {
    3
}
fn default_angular() -> usize {
    8
}

impl WeightedNormParams {
    pub fn new(k: usize, tau: f64, inner_radius: f64) -> Self {
        WeightedNormParams {
            k,
            tau,
            inner_radius,
            per_decade: default_per_decade(),
            decades: default_decades(),
            q: default_angular(),
        }
    }

    /// `k = 2`, `τ` just below the declared decay order (1 when none),
    /// inner radius `max(1, excision radius)`.
    pub fn for_spec(spec: &MetricSpec) -> Self {
        let tau = spec.decay_order().map(|t| t - 0.01).unwrap_or(1.0);
        Self::new(2, tau, spec.excision_radius().max(1.0))
    }

    fn validate(&self) -> Result<()> {
        if self.k > 2 {
            return Err(Error::InvalidInput(format!("k must be at most 2, got {}", self.k)));
        }
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::InvalidInput("tau must be positive".into()));
        }
        if !(self.inner_radius > 0.0 && self.inner_radius.is_finite()) {
            return Err(Error::InvalidInput("inner_radius must be positive".into()));
        }
        if self.per_decade == 0 || self.decades == 0 || self.q == 0 {
            return Err(Error::InvalidInput("weighted grid is empty".into()));
        }
        Ok(())
    }

    /// Log-spaced radii, endpoints included.
    pub fn radii(&self) -> Vec<f64> {
        let count = self.per_decade * self.decades;
        (0..=count)
            .map(|j| self.inner_radius * 10f64.powf(j as f64 / self.per_decade as f64))
            .collect()
    }

    fn points(&self, n: usize) -> Result<Vec<Vec<f64>>> {
        let chart = SphericalChart::with_budget(n, self.q, VOLUME_NODE_BUDGET)?;
        Ok(self
            .radii()
            .iter()
            .flat_map(|&r| {
                chart
                    .nodes()
                    .iter()
                    .map(move |node| node.direction.iter().map(|d| d * r).collect())
            })
            .collect())
    }
}

fn weighted_jet_max(jet: &Jet, r: f64, k: usize, tau: f64) -> f64 {
    let n = jet.dim();
    let mut m = r.powf(tau) * jet.value.abs();
    if k >= 1 {
        let w = r.powf(1.0 + tau);
        for i in 0..n {
            m = m.max(w * jet.grad[i].abs());
        }
    }
    if k >= 2 {
        let w = r.powf(2.0 + tau);
        for i in 0..n {
            for j in 0..n {
                m = m.max(w * jet.hess[i][j].abs());
            }
        }
    }
    m
}

fn grid_max(
    n: usize,
    params: &WeightedNormParams,
    f: impl Fn(&[f64]) -> Result<f64> + Sync,
) -> Result<f64> {
    params.validate()?;
    let values: Result<Vec<f64>> = params.points(n)?.par_iter().map(|x| f(x)).collect();
    Ok(values?.into_iter().fold(0.0, f64::max))
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|a| a * a).sum::<f64>().sqrt()
}

/// `max |x|^{|γ|+τ} |∂^γ f(x)|` over the grid and `|γ| ≤ k`.
pub fn weighted_seminorm(f: &impl ScalarField, n: usize, params: &WeightedNormParams) -> Result<f64> {
    grid_max(n, params, |x| {
        let jet = f.eval(&Jet::point(x));
        Ok(weighted_jet_max(&jet, norm(x), params.k, params.tau))
    })
}

/// `max |x|^τ |f(x)|` over the grid, for fields known only by value.
pub fn weighted_sup(
    f: impl Fn(&[f64]) -> Result<f64> + Sync,
    n: usize,
    params: &WeightedNormParams,
) -> Result<f64> {
    grid_max(n, params, |x| Ok(norm(x).powf(params.tau) * f(x)?.abs()))
}

/// Weighted seminorm of `g − δ`, maximized over components.
pub fn weighted_metric_distance(
    metric: &(impl ChartMetric + ?Sized),
    params: &WeightedNormParams,
) -> Result<f64> {
    let n = metric.dim();
    grid_max(n, params, |x| {
        let comps = metric.components(&Jet::point(x))?;
        let r = norm(x);
        let mut m: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                let delta = if i == j { 1.0 } else { 0.0 };
                m = m.max(weighted_jet_max(&(comps[i * n + j] - delta), r, params.k, params.tau));
            }
        }
        Ok(m)
    })
}

/// `Σ ∂_i∂_j g_ij − Σ ∂_j∂_j g_ii` in the spec's chart.
pub fn d_operator_at(spec: &MetricSpec, x: &[f64]) -> Result<f64> {
    let md = metric::metric_derivatives_at(spec, x, 2)?;
    Ok(d_operator(&md))
}

fn d_operator(md: &tensor::MetricDerivatives) -> f64 {
    let n = md.dim;
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += md.ddg(i, j, i, j) - md.ddg(j, j, i, i);
        }
    }
    s
}

/// Radial panel breaks: halving from `outer` down to `inner` (or to
/// `outer/2¹⁴` when `inner` is zero), merged with the family's breakpoints.
fn radial_breaks(inner: f64, outer: f64, extra: &[f64]) -> Vec<f64> {
    let floor = inner.max(outer * 0.5f64.powi(14));
    let mut breaks = vec![outer];
    let mut r = outer;
    while r / 2.0 > floor * (1.0 + 1e-9) {
        r /= 2.0;
        breaks.push(r);
    }
    breaks.push(inner);
    breaks.extend(extra.iter().copied().filter(|&b| b > inner && b < outer));
    breaks.sort_by(f64::total_cmp);
    breaks.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * outer);
    breaks
}

/// `∫_{inner<|x|<outer} f dV₀` accumulated panel by panel; returns the
/// running total at every break.
fn shell_integrals(
    n: usize,
    breaks: &[f64],
    q: usize,
    f: impl Fn(&[f64]) -> Result<f64> + Sync,
) -> Result<Vec<(f64, f64)>> {
    let chart = SphericalChart::with_budget(n, q, VOLUME_NODE_BUDGET)?;
    let base = Rule::gauss_legendre(RADIAL_ORDER);
    let mut radial = Vec::new();
    for w in breaks.windows(2) {
        let rule = base.mapped(w[0], w[1]);
        radial.extend(rule.nodes.into_iter().zip(rule.weights));
    }
    let per_radius: Result<Vec<f64>> = radial
        .par_iter()
        .map(|&(r, w)| {
            let mut s = 0.0;
            for node in chart.nodes() {
                let x: Vec<f64> = node.direction.iter().map(|d| d * r).collect();
                s += node.weight * f(&x)?;
            }
            Ok(w * r.powi(n as i32 - 1) * s)
        })
        .collect();
    let per_radius = per_radius?;
    let mut out = vec![(breaks[0], 0.0)];
    let mut total = 0.0;
    for (p, chunk) in per_radius.chunks(RADIAL_ORDER).enumerate() {
        total += chunk.iter().sum::<f64>();
        out.push((breaks[p + 1], total));
    }
    Ok(out)
}

fn mass_normalization(n: usize) -> f64 {
    1.0 / (2.0 * (n as f64 - 1.0) * unit_sphere_area(n))
}

/// ADM mass as `flux(inner) + (1/(2(n−1)ω)) ∫ 𝒟(g) dV₀` over
/// `inner < |x| < outer`, with the remaining tail extrapolated from the
/// running totals at `outer/8, outer/4, outer/2, outer`.
pub fn mass_via_divergence(spec: &MetricSpec, outer_radius: f64, q: usize) -> Result<MassEstimate> {
    let n = spec.n();
    if n < 3 {
        return Err(Error::UnsupportedDimension(n));
    }
    let af = spec.asymptotic_chart();
    let inner = af.excision_radius();
    if !(outer_radius > 16.0 * inner.max(1e-300) && outer_radius.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "outer radius {outer_radius} must exceed 16 × inner radius {inner}"
        )));
    }
    let boundary = if inner > 0.0 {
        mass::flux_in_chart(&af, inner, q)?
    } else {
        0.0
    };
    let breaks = radial_breaks(inner, outer_radius, &af.radial_breakpoints());
    let totals = shell_integrals(n, &breaks, q, |x| d_operator_at(&af, x))?;
    let c = mass_normalization(n);
    let checkpoints = [8.0, 4.0, 2.0, 1.0].map(|d| outer_radius / d);
    let raw: Vec<f64> = checkpoints
        .iter()
        .map(|&r| {
            let (_, t) = totals
                .iter()
                .min_by(|a, b| (a.0 - r).abs().total_cmp(&(b.0 - r).abs()))
                .expect("nonempty totals");
            boundary + c * t
        })
        .collect();
    let est = fit::extrapolate(&checkpoints, &raw, mass::decay_exponent(spec))?;
    let correction = est.value - raw[3];
    if correction.abs() > MAX_TAIL_FRACTION * est.value.abs() && correction.abs() > 1e-10 {
        return Err(Error::TailNotNegligible {
            correction,
            value: est.value,
        });
    }
    Ok(est)
}

/// `(1/(2(n−1)ω)) ∫ R(g) dV_g` over `inner < |x| < outer`. The tail beyond
/// `outer` is taken as zero, which is exact when the scalar curvature is
/// compactly supported inside `outer`.
pub fn matter_integral(spec: &MetricSpec, outer_radius: f64, q: usize) -> Result<f64> {
    let n = spec.n();
    if n < 3 {
        return Err(Error::UnsupportedDimension(n));
    }
    let af = spec.asymptotic_chart();
    let inner = af.excision_radius();
    if !(outer_radius > inner && outer_radius.is_finite()) {
        return Err(Error::InvalidInput("outer radius must exceed the inner radius".into()));
    }
    let breaks = radial_breaks(inner, outer_radius, &af.radial_breakpoints());
    let totals = shell_integrals(n, &breaks, q, |x| {
        let md = metric::metric_derivatives_at(&af, x, 2)?;
        let c = tensor::curvature(&md)?;
        let det = tensor::spd_determinant(n, &md.g)
            .ok_or_else(|| Error::NotPositiveDefinite { point: x.to_vec() })?;
        Ok(c.scalar * det.sqrt())
    })?;
    Ok(mass_normalization(n) * totals.last().expect("nonempty totals").1)
}

/// ADM mass, matter term and their difference.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DefectReport {
    pub mass: MassEstimate,
    pub matter_integral: f64,
    pub defect: f64,
}

/// `m_ADM − (1/(2(n−1)ω)) ∫ R dV_g`.
pub fn mass_matter_defect(
    spec: &MetricSpec,
    radii: &[f64],
    outer_radius: f64,
    q: usize,
) -> Result<DefectReport> {
    let mass = mass::adm_mass(spec, radii, q)?;
    let matter = matter_integral(spec, outer_radius, q)?;
    Ok(DefectReport {
        defect: mass.value - matter,
        matter_integral: matter,
        mass,
    })
}

/// One row of the defect CSV along a sequence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DefectRow {
    pub i: u32,
    pub mass: f64,
    pub matter: f64,
    pub defect: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{ConformalFactor, Family};
    use crate::quadrature::adaptive;
    use crate::sequences::default_shell;
    use std::f64::consts::PI;

    fn shell_potential(n: usize, i: u32) -> (MetricSpec, crate::sequences::ShellPotential) {
        let spec = default_shell(n, i).unwrap();
        let pot = match spec.family() {
            Family::ShellConformal(f) => f.potential().clone(),
            _ => unreachable!(),
        };
        (spec, pot)
    }

    #[test]
    fn seminorm_examples() {
        let p = WeightedNormParams::new(2, 1.3, 1.0);
        let zero = |x: &[Jet]| Jet::constant(x.len(), 0.0);
        assert_eq!(weighted_seminorm(&zero, 3, &p).unwrap(), 0.0);

        let p0 = WeightedNormParams::new(0, 1.3, 1.0);
        let f = |x: &[Jet]| crate::jet::norm_sq(x).powf(-0.65);
        assert!((weighted_seminorm(&f, 3, &p0).unwrap() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn seminorm_detects_too_strong_weight() {
        let (_, pot) = shell_potential(3, 1);
        let v = |x: &[Jet]| pot.u_jet(x) - 1.0;
        let inside = WeightedNormParams::new(2, 0.99, 1.0);
        let a = weighted_seminorm(&v, 3, &inside).unwrap();
        let mut wider = inside.clone();
        wider.decades = 5;
        let b = weighted_seminorm(&v, 3, &wider).unwrap();
        assert!(a.is_finite() && (b / a) < 1.2);
        let beyond = WeightedNormParams { tau: 1.5, ..inside.clone() };
        let beyond_wide = WeightedNormParams { decades: 5, ..beyond.clone() };
        let c = weighted_seminorm(&v, 3, &beyond).unwrap();
        let d = weighted_seminorm(&v, 3, &beyond_wide).unwrap();
        // |x|^{τ} v ~ |x|^{τ−1}: two more decades multiply the sup by 10
        assert!(d / c > 8.0, "{c} {d}");
    }

    #[test]
    fn d_operator_examples() {
        assert_eq!(d_operator_at(&MetricSpec::euclidean(4), &[1.0, 2.0, 0.5, 3.0]).unwrap(), 0.0);
        // harmonic factor: 𝒟 − R decays like r^{−2−2τ}, τ = n − 2
        let spec = MetricSpec::conformally_flat(3, ConformalFactor::PointMass { a: 0.5 }).unwrap();
        let scaled: Vec<f64> = [10.0, 100.0, 1000.0]
            .iter()
            .map(|&r| {
                let x = [r * 0.6, 0.0, r * 0.8];
                let d = d_operator_at(&spec, &x).unwrap();
                let s = metric::curvature_at(&spec, &x).unwrap().scalar;
                (d - s).abs() * r.powi(4)
            })
            .collect();
        assert!(scaled.iter().all(|v| *v > 0.1 && *v < 10.0), "{scaled:?}");
        assert!((scaled[2] / scaled[1] - 1.0).abs() < 0.05);
    }

    #[test]
    fn d_operator_tracks_scalar_curvature_in_shells() {
        // the difference is quadratic in g − δ = O(i^{2−n})
        let rel: Vec<f64> = [1u32, 8, 64]
            .iter()
            .map(|&i| {
                let (spec, _) = shell_potential(3, i);
                let x = [0.75 * i as f64, 0.0, 0.0];
                let d = d_operator_at(&spec, &x).unwrap();
                let s = metric::curvature_at(&spec, &x).unwrap().scalar;
                ((d - s) / s).abs()
            })
            .collect();
        assert!(rel[1] < rel[0] / 4.0 && rel[2] < rel[1] / 4.0, "{rel:?}");
        assert!(rel[2] < 0.02, "{rel:?}");
    }

    #[test]
    fn divergence_mass_examples() {
        let e = mass_via_divergence(&MetricSpec::euclidean(3), 400.0, 16).unwrap();
        assert_eq!(e.value, 0.0);
        let s = mass_via_divergence(&MetricSpec::schwarzschild(3, 1.0).unwrap(), 400.0, 16).unwrap();
        assert!((s.value - 1.0).abs() < 1e-3, "{}", s.value);
        let (shell, _) = shell_potential(3, 1);
        let m = mass_via_divergence(&shell, 400.0, 16).unwrap();
        assert!((m.value - 1.0 / (2.0 * PI)).abs() < 1e-4, "{}", m.value);
    }

    #[test]
    fn matter_and_defect() {
        let s = MetricSpec::schwarzschild(3, 1.0).unwrap();
        assert!(matter_integral(&s, 400.0, 16).unwrap().abs() < 1e-10);
        let d = mass_matter_defect(&s, &[50.0, 100.0, 200.0, 400.0], 400.0, 16).unwrap();
        assert!((d.defect - 1.0).abs() < 1e-3);

        // per-index oracle: matter = (2/((n−2)ω)) ∫ (1 + v) ρ dx
        for (n, i) in [(3usize, 1u32), (3, 4), (4, 2)] {
            let (spec, pot) = shell_potential(n, i);
            let nf = n as f64;
            let omega = unit_sphere_area(n);
            let iu = omega
                * adaptive(
                    &|s: f64| s.powf(nf - 1.0) * (1.0 + pot.v(s)) * pot.density(s),
                    0.5 * i as f64,
                    i as f64,
                    1e-15,
                );
            let oracle = 2.0 / ((nf - 2.0) * omega) * iu;
            let got = matter_integral(&spec, 400.0, 16).unwrap();
            assert!((got - oracle).abs() < 1e-8, "n={n} i={i}: {got} vs {oracle}");
        }
    }

    #[test]
    fn radial_breaks_cover_interval() {
        let b = radial_breaks(0.0, 400.0, &[0.5, 1.0]);
        assert_eq!(b[0], 0.0);
        assert_eq!(*b.last().unwrap(), 400.0);
        assert!(b.contains(&0.5) && b.contains(&1.0) && b.contains(&50.0));
        assert!(b.windows(2).all(|w| w[1] > w[0]));
    }
}
