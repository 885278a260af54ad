//! Asymptotically conical surfaces `dr² + F(r, θ)² dθ²`, their Gauss and
//! geodesic curvature, Gauss–Bonnet bookkeeping and the cone mass `1 − α`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::{self, CrossCheck, MassEstimate};
use crate::jet::Jet;
use crate::metric::ChartMetric;
use crate::quadrature::Rule;
use crate::sequences::{
    assemble_report, blow_up_window, c2_window_distance, identity_window,
    normalized_escaping_window, plain_window, ExperimentData, ExperimentReport,
};
use crate::tensor::{self, MetricDerivatives};

/// `F ↦ F · (1 + amplitude · s(r) · cos(mode θ))` with
/// `s(r) = r^{mode+2} / (1 + r²)^{(mode+2+decay)/2}`, so `s = O(r^{−decay})`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConePerturbation {
    pub amplitude: f64,
    #[serde(default)]
    pub mode: u32,
    pub decay: f64,
}

/// Smooth filling of the cone tip: a round (α < 1) or hyperbolic (α > 1)
/// disk of curvature radius `radius`, continued by a straight cone.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cap {
    pub radius: f64,
    #[serde(default = "default_euler")]
    pub euler_characteristic: i32,
}

fn default_euler() -> i32 {
    1
}

fn default_scale() -> f64 {
    1.0
}

fn is_default_scale(s: &f64) -> bool {
    *s == 1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConicalSurface {
    pub alpha: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perturbation: Option<ConePerturbation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cap: Option<Cap>,
    /// Length scale `λ`: the surface is `λ² g` written in the chart `λ x`.
    #[serde(default = "default_scale", skip_serializing_if = "is_default_scale")]
    pub scale: f64,
}

impl ConicalSurface {
    /// `dr² + α² r² dθ²` on the punctured plane.
    pub fn flat_cone(alpha: f64) -> Self {
        ConicalSurface {
            alpha,
            perturbation: None,
            cap: None,
            scale: 1.0,
        }
    }

    /// Cone of angle `2πα` whose tip is replaced by a constant-curvature cap.
    pub fn capped(alpha: f64, cap_radius: f64) -> Self {
        ConicalSurface {
            cap: Some(Cap {
                radius: cap_radius,
                euler_characteristic: 1,
            }),
            ..Self::flat_cone(alpha)
        }
    }

    pub fn with_perturbation(mut self, amplitude: f64, mode: u32, decay: f64) -> Self {
        self.perturbation = Some(ConePerturbation {
            amplitude,
            mode,
            decay,
        });
        self
    }

    /// `λ² g` in the chart `λ x`.
    pub fn scaled(&self, lambda: f64) -> Self {
        ConicalSurface {
            scale: self.scale * lambda,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSpec(m));
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return bad(format!("alpha must be positive, got {}", self.alpha));
        }
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return bad(format!("scale must be positive, got {}", self.scale));
        }
        if let Some(c) = &self.cap {
            if !(c.radius > 0.0 && c.radius.is_finite()) {
                return bad("cap radius must be positive".into());
            }
        }
        if let Some(p) = &self.perturbation {
            if !(p.decay > 0.0 && p.decay.is_finite()) {
                return bad("perturbation decay must be positive".into());
            }
            // s ≤ 1, so |amplitude| < 1 keeps F positive
            if !(p.amplitude.abs() < 1.0) {
                return bad("perturbation amplitude must lie in (−1, 1)".into());
            }
        }
        Ok(())
    }

    /// Radius where the cap profile hands over to the straight cone, in
    /// chart units; zero without a cap.
    pub fn cap_edge(&self) -> f64 {
        match &self.cap {
            None => 0.0,
            Some(c) => {
                let a = self.alpha;
                let r0 = if a < 1.0 {
                    a.acos()
                } else if a > 1.0 {
                    a.acosh()
                } else {
                    0.0
                };
                self.scale * c.radius * r0
            }
        }
    }

    /// Unperturbed profile `f, f', f''` at radius `r` of the unscaled surface.
    fn base_profile(&self, r: f64) -> (f64, f64, f64) {
        let a = self.alpha;
        match &self.cap {
            None => (a * r, a, 0.0),
            Some(_) if a == 1.0 => (r, 1.0, 0.0),
            Some(c) => {
                let big_r = c.radius;
                let (r0, height) = if a < 1.0 {
                    (big_r * a.acos(), big_r * (1.0 - a * a).sqrt())
                } else {
                    (big_r * a.acosh(), big_r * (a * a - 1.0).sqrt())
                };
                if r >= r0 {
                    (height + a * (r - r0), a, 0.0)
                } else if a < 1.0 {
                    let t = r / big_r;
                    (big_r * t.sin(), t.cos(), -t.sin() / big_r)
                } else {
                    let t = r / big_r;
                    (big_r * t.sinh(), t.cosh(), t.sinh() / big_r)
                }
            }
        }
    }

    /// `F` as a jet, from jets of `r`, `r²` and `cos(mode θ)` in chart units.
    fn warp(&self, r: Jet, r2: Jet, angular: Option<Jet>) -> Jet {
        let l = self.scale;
        let (f0, f1, f2) = self.base_profile(r.value / l);
        let f = r.chain(l * f0, f1, f2 / l);
        match &self.perturbation {
            None => f,
            Some(p) => {
                let k = p.mode as f64;
                let u2 = r2 * (1.0 / (l * l));
                let s = u2.powf((k + 2.0) / 2.0) * (u2 + 1.0).powf(-(k + 2.0 + p.decay) / 2.0);
                let shape = match angular {
                    Some(c) => s * c,
                    None => s,
                };
                f * (shape * p.amplitude + 1.0)
            }
        }
    }

    fn mode(&self) -> u32 {
        self.perturbation.as_ref().map_or(0, |p| p.mode)
    }

    /// `F(r, θ)` with derivatives in `(r, θ)`.
    fn polar_warp(&self, r: f64, theta: f64) -> Jet {
        let rj = Jet::variable(2, 0, r);
        let tj = Jet::variable(2, 1, theta);
        let k = self.mode();
        let angular = (k > 0).then(|| (tj * k as f64).cos());
        self.warp(rj, rj * rj, angular)
    }

    /// Components `g_ij = ω_iω_j + (F²/r²)(δ_ij − ω_iω_j)` in Cartesian
    /// coordinates.
    pub fn cartesian_components(&self, x: &[Jet]) -> Result<Vec<Jet>> {
        let r2 = x[0] * x[0] + x[1] * x[1];
        if r2.value == 0.0 {
            return Err(Error::SingularPoint {
                point: x.iter().map(|j| j.value).collect(),
            });
        }
        let r = r2.sqrt();
        let k = self.mode();
        let angular = (k > 0).then(|| {
            // cos kθ = Re((x + iy)^k) / r^k
            let (mut re, mut im) = (x[0], x[1]);
            for _ in 1..k {
                let next_re = re * x[0] - im * x[1];
                im = re * x[1] + im * x[0];
                re = next_re;
            }
            re * r2.powf(-(k as f64) / 2.0)
        });
        let f = self.warp(r, r2, angular);
        let ratio = f * f / r2;
        let mut out = Vec::with_capacity(4);
        for i in 0..2 {
            for j in 0..2 {
                let radial = x[i] * x[j] / r2;
                let delta = if i == j { 1.0 } else { 0.0 };
                out.push(radial + ratio * (delta - radial));
            }
        }
        Ok(out)
    }

    /// Polar metric `dr² + F² dθ²` with derivatives in `(r, θ)`.
    fn polar_metric(&self, r: f64, theta: f64) -> MetricDerivatives {
        let f = self.polar_warp(r, theta);
        let one = Jet::constant(2, 1.0);
        let zero = Jet::constant(2, 0.0);
        MetricDerivatives::from_jets(2, &[one, zero, zero, f * f], true)
    }
}

impl ChartMetric for ConicalSurface {
    fn dim(&self) -> usize {
        2
    }

    fn components(&self, x: &[Jet]) -> Result<Vec<Jet>> {
        self.cartesian_components(x)
    }

    fn boundary_distance(&self, x: &[f64]) -> f64 {
        (x[0] * x[0] + x[1] * x[1]).sqrt()
    }
}

fn check_radius(r: f64) -> Result<()> {
    if r > 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("radius must be positive, got {r}")))
    }
}

/// `K = −F_rr / F`.
pub fn gauss_curvature_at(surface: &ConicalSurface, r: f64, theta: f64) -> Result<f64> {
    check_radius(r)?;
    let f = surface.polar_warp(r, theta);
    Ok(-f.hess[0][0] / f.value)
}

/// Angular trapezoid nodes `θ_k = 2πk/m`.
fn angles(q: usize) -> Vec<f64> {
    let m = q.max(4);
    (0..m).map(|k| 2.0 * PI * k as f64 / m as f64).collect()
}

/// `∫_{Γ_r} κ_g ds` with `κ_g ds = −Γ^r_θθ / √g_θθ dθ` for the outward
/// normal `∂_r`.
pub fn geodesic_curvature_integral(surface: &ConicalSurface, r: f64, q: usize) -> Result<f64> {
    check_radius(r)?;
    let thetas = angles(q);
    let weight = 2.0 * PI / thetas.len() as f64;
    let mut total = 0.0;
    for &t in &thetas {
        let md = surface.polar_metric(r, t);
        let ginv = tensor::spd_inverse(2, &md.g)
            .ok_or_else(|| Error::NotPositiveDefinite { point: vec![r, t] })?;
        let gamma = tensor::christoffel(&md, &ginv);
        // Γ^r_θθ at flat index [k][i][j] = [0][1][1]
        total += -gamma[3] / md.g(1, 1).sqrt();
    }
    Ok(weight * total)
}

/// Radial panel breaks on `[0, r]`: four panels across the cap, then
/// doubling widths.
fn radial_breaks(surface: &ConicalSurface, r: f64) -> Vec<f64> {
    let edge = surface.cap_edge().min(r);
    let mut breaks: Vec<f64> = (0..=4).map(|k| edge * k as f64 / 4.0).collect();
    let mut b = edge.max(0.25 * surface.scale);
    if edge == 0.0 {
        breaks = vec![0.0];
    }
    while b < r {
        if b > *breaks.last().unwrap() {
            breaks.push(b);
        }
        b *= 2.0;
    }
    if *breaks.last().unwrap() < r {
        breaks.push(r);
    }
    breaks
}

/// `∫_{B_r} K dA = ∫∫ −F_rr dr dθ` over the cap and the annulus out to `r`.
pub fn total_gauss_curvature(surface: &ConicalSurface, r: f64, q: usize) -> Result<f64> {
    check_radius(r)?;
    if surface.cap.is_none() {
        return Err(Error::MissingCap);
    }
    let thetas = angles(q);
    let weight = 2.0 * PI / thetas.len() as f64;
    let base = Rule::gauss_legendre(16);
    let breaks = radial_breaks(surface, r);
    let panels: Vec<f64> = breaks
        .windows(2)
        .collect::<Vec<_>>()
        .par_iter()
        .map(|w| {
            let rule = base.mapped(w[0], w[1]);
            let mut s = 0.0;
            for (&rr, &wr) in rule.nodes.iter().zip(&rule.weights) {
                for &t in &thetas {
                    s += wr * weight * -surface.polar_warp(rr, t).hess[0][0];
                }
            }
            s
        })
        .collect();
    Ok(panels.iter().sum())
}

/// `|∫_{B_r} K dA − 2πχ + ∫_{Γ_r} κ_g ds|`.
pub fn gauss_bonnet_residual(surface: &ConicalSurface, r: f64, q: usize) -> Result<f64> {
    let chi = surface.cap.as_ref().ok_or(Error::MissingCap)?.euler_characteristic as f64;
    let k = total_gauss_curvature(surface, r, q)?;
    let kappa = geodesic_curvature_integral(surface, r, q)?;
    Ok((k - 2.0 * PI * chi + kappa).abs())
}

/// Largest discrepancy tolerated between the two cone-mass estimates.
pub const ESTIMATE_TOLERANCE: f64 = 1e-6;

/// `1 − α` from the geodesic curvature of large circles; with a cap, also
/// from the total curvature, reported as a cross-check.
pub fn cone_mass(surface: &ConicalSurface, radii: &[f64], q: usize) -> Result<MassEstimate> {
    surface.validate()?;
    fit::validate_radii(radii)?;
    let p = surface.perturbation.as_ref().map_or(1.0, |p| p.decay);
    let raw = radii
        .iter()
        .map(|&r| Ok(1.0 - geodesic_curvature_integral(surface, r, q)? / (2.0 * PI)))
        .collect::<Result<Vec<f64>>>()?;
    let mut est = fit::extrapolate(radii, &raw, p)?;
    if let Some(cap) = &surface.cap {
        let chi = cap.euler_characteristic as f64;
        let raw_b = radii
            .iter()
            .map(|&r| Ok((total_gauss_curvature(surface, r, q)? - 2.0 * PI * (chi - 1.0)) / (2.0 * PI)))
            .collect::<Result<Vec<f64>>>()?;
        let other = fit::extrapolate(radii, &raw_b, p)?;
        let discrepancy = (other.value - est.value).abs();
        if discrepancy > ESTIMATE_TOLERANCE.max(est.error + other.error) {
            return Err(Error::EstimatesDisagree {
                first: est.value,
                second: other.value,
            });
        }
        est.cross_check = Some(CrossCheck {
            value: other.value,
            discrepancy,
        });
    }
    Ok(est)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConeExperimentKind {
    BlowUp,
    Escaping,
    Constant,
}

fn default_cone_window() -> f64 {
    0.25
}
fn default_cone_resolution() -> usize {
    5
}
fn default_cone_q() -> usize {
    64
}
fn default_cone_radii() -> Vec<f64> {
    vec![50.0, 100.0, 200.0, 400.0]
}
fn default_cone_spacing() -> f64 {
    20.0
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConeExperimentConfig {
    pub kind: ConeExperimentKind,
    pub surface: ConicalSurface,
    pub indices: Vec<u32>,
    #[serde(rename = "window_L", default = "default_cone_window")]
    pub window_l: f64,
    #[serde(default = "default_cone_resolution")]
    pub resolution: usize,
    /// Blow-up center; `(cap radius / 2, 0)` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point: Option<Vec<f64>>,
    #[serde(default = "default_cone_spacing")]
    pub spacing: f64,
    #[serde(default = "default_cone_q")]
    pub q: usize,
    #[serde(default = "default_cone_radii")]
    pub radii: Vec<f64>,
}

impl ConeExperimentConfig {
    pub fn new(kind: ConeExperimentKind, surface: ConicalSurface, indices: Vec<u32>) -> Self {
        ConeExperimentConfig {
            kind,
            surface,
            indices,
            window_l: default_cone_window(),
            resolution: default_cone_resolution(),
            point: None,
            spacing: default_cone_spacing(),
            q: default_cone_q(),
            radii: default_cone_radii(),
        }
    }
}

fn scaled_radii(radii: &[f64], factor: f64) -> Vec<f64> {
    radii.iter().map(|r| r * factor.max(1.0)).collect()
}

/// Semicontinuity experiment with the cone mass in place of the ADM mass.
/// Blow-ups and escaping points converge to the flat plane.
pub fn cone_semicontinuity_experiment(config: &ConeExperimentConfig) -> Result<ExperimentReport> {
    let surface = &config.surface;
    surface.validate()?;
    if config.indices.is_empty() || config.indices.contains(&0) {
        return Err(Error::InvalidInput("indices must be positive".into()));
    }
    if config.indices.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("indices must be strictly increasing".into()));
    }
    let (l, res, q) = (config.window_l, config.resolution, config.q);
    let identity = identity_window(2, l, res)?;
    let plane = cone_mass(&ConicalSurface::flat_cone(1.0), &config.radii, q)?;
    let indices = config.indices.clone();
    let data = match config.kind {
        ConeExperimentKind::BlowUp => {
            let p = config.point.clone().unwrap_or_else(|| {
                let half = surface.cap.as_ref().map_or(1.0, |c| c.radius) * surface.scale / 2.0;
                vec![half, 0.0]
            });
            let per_index = indices
                .iter()
                .map(|&i| {
                    let s = i as f64;
                    let m = cone_mass(&surface.scaled(s), &scaled_radii(&config.radii, s), q)?;
                    let w = blow_up_window(surface, &p, s, l, res)?;
                    Ok((m, c2_window_distance(&w, &identity)?))
                })
                .collect::<Result<Vec<_>>>()?;
            let (masses, distances) = per_index.into_iter().unzip();
            ExperimentData {
                label: format!("blow-up of cone alpha={} at {p:?}", surface.alpha),
                scales: indices.iter().map(|&i| i as f64).collect(),
                indices,
                masses,
                limit_label: "flat plane".into(),
                limit_mass: plane,
                distances,
                nominal_exponent: Some(1.0),
            }
        }
        ConeExperimentKind::Escaping => {
            let offsets: Vec<Vec<f64>> = indices
                .iter()
                .map(|&i| vec![config.spacing * i as f64, 0.0])
                .collect();
            let windows = normalized_escaping_window(surface, &offsets, l, res)?;
            let m = cone_mass(surface, &config.radii, q)?;
            let distances = windows
                .iter()
                .map(|w| c2_window_distance(w, &identity))
                .collect::<Result<Vec<_>>>()?;
            ExperimentData {
                label: format!("escaping points on cone alpha={}", surface.alpha),
                scales: offsets.iter().map(|p| p[0]).collect(),
                masses: vec![m; indices.len()],
                indices,
                limit_label: "flat plane".into(),
                limit_mass: plane,
                distances,
                // Cartesian coordinates on a flat cone bend like 1/|p|
                nominal_exponent: Some(1.0),
            }
        }
        ConeExperimentKind::Constant => {
            let m = cone_mass(surface, &config.radii, q)?;
            let center = config.point.clone().unwrap_or_else(|| vec![surface.scale, 0.0]);
            let w = plain_window(surface, &center, l, res)?;
            let d = c2_window_distance(&w, &w)?;
            ExperimentData {
                label: format!("constant sequence of cone alpha={}", surface.alpha),
                scales: indices.iter().map(|&i| i as f64).collect(),
                masses: vec![m.clone(); indices.len()],
                distances: vec![d; indices.len()],
                indices,
                limit_label: "same surface".into(),
                limit_mass: m,
                nominal_exponent: None,
            }
        }
    };
    Ok(assemble_report(data))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{self, Family, MetricSpec};

    const RADII: [f64; 4] = [50.0, 100.0, 200.0, 400.0];

    #[test]
    fn flat_cone_curvatures() {
        let c = ConicalSurface::flat_cone(0.7);
        for &r in &[0.5, 2.0, 30.0] {
            assert_eq!(gauss_curvature_at(&c, r, 1.0).unwrap(), 0.0);
            let k = geodesic_curvature_integral(&c, r, 16).unwrap();
            assert!((k - 4.398230).abs() < 1e-6);
            assert!((k - 2.0 * PI * 0.7).abs() < 1e-13);
        }
        let plane = geodesic_curvature_integral(&ConicalSurface::flat_cone(1.0), 3.0, 8).unwrap();
        assert!((plane - 2.0 * PI).abs() < 1e-13);
    }

    #[test]
    fn round_cap_curvature() {
        let c = ConicalSurface::capped(0.7, 2.0);
        for &r in &[0.1, 0.5, 1.2] {
            assert!((gauss_curvature_at(&c, r, 0.3).unwrap() - 0.25).abs() < 1e-13);
        }
        assert_eq!(gauss_curvature_at(&c, 5.0, 0.3).unwrap(), 0.0);
        assert!((c.cap_edge() - 2.0 * 0.7f64.acos()).abs() < 1e-15);
        let h = ConicalSurface::capped(1.3, 1.0);
        assert!((gauss_curvature_at(&h, 0.3, 0.0).unwrap() + 1.0).abs() < 1e-13);
    }

    #[test]
    fn perturbation_decay() {
        let c = ConicalSurface::capped(0.7, 1.0).with_perturbation(0.3, 2, 1.0);
        let ks: Vec<f64> = [20.0, 40.0, 80.0, 160.0]
            .iter()
            .map(|&r| gauss_curvature_at(&c, r, 0.0).unwrap().abs() * r.powi(3))
            .collect();
        assert!(ks.iter().all(|v| *v < 1.0), "{ks:?}");
    }

    #[test]
    fn cartesian_matches_polar() {
        let c = ConicalSurface::capped(0.6, 1.5).with_perturbation(0.2, 3, 1.5);
        let spec = MetricSpec::new(2, Family::Cone2D(c.clone())).unwrap();
        for &(r, t) in &[(0.7, 0.4), (2.5, 2.0), (9.0, -1.1)] {
            let x = [r * f64::cos(t), r * f64::sin(t)];
            let scalar = metric::curvature_at(&spec, &x).unwrap().scalar;
            let k = gauss_curvature_at(&c, r, t).unwrap();
            assert!((scalar - 2.0 * k).abs() < 1e-10 * (1.0 + k.abs()), "{scalar} vs {k}");
        }
        let flat = MetricSpec::new(2, Family::Cone2D(ConicalSurface::flat_cone(0.7))).unwrap();
        let g = metric::metric_at(&flat, &[0.0, 2.0]).unwrap();
        assert!((g[(0, 0)] - 0.49).abs() < 1e-15 && (g[(1, 1)] - 1.0).abs() < 1e-15);
        assert!(matches!(
            metric::metric_at(&flat, &[0.0, 0.0]),
            Err(Error::SingularPoint { .. })
        ));
    }

    #[test]
    fn gauss_bonnet_bookkeeping() {
        let plane = ConicalSurface::capped(1.0, 1.0);
        assert!(total_gauss_curvature(&plane, 10.0, 16).unwrap().abs() < 1e-14);
        let c = ConicalSurface::capped(0.7, 1.0);
        let total = total_gauss_curvature(&c, 100.0, 16).unwrap();
        assert!((total - 2.0 * PI * 0.3).abs() < 1e-10);
        let p = ConicalSurface::capped(0.5, 2.0).with_perturbation(0.4, 0, 0.8);
        for &r in &[0.5, 3.0, 10.0, 100.0] {
            assert!(gauss_bonnet_residual(&p, r, 32).unwrap() < 1e-8, "r={r}");
        }
        assert!(matches!(
            total_gauss_curvature(&ConicalSurface::flat_cone(0.7), 5.0, 8),
            Err(Error::MissingCap)
        ));
    }

    #[test]
    fn cone_mass_examples() {
        for &a in &[0.25, 0.5, 0.7, 1.0, 1.3] {
            let m = cone_mass(&ConicalSurface::capped(a, 1.0), &RADII, 16).unwrap();
            assert!((m.value - (1.0 - a)).abs() < 1e-10);
            assert!(m.cross_check.unwrap().discrepancy < 1e-6);
        }
        let bare = cone_mass(&ConicalSurface::flat_cone(0.7), &RADII, 16).unwrap();
        assert!((bare.value - 0.3).abs() < 1e-12 && bare.cross_check.is_none());
        let p = ConicalSurface::capped(0.6, 1.0).with_perturbation(0.3, 0, 1.0);
        let m = cone_mass(&p, &RADII, 16).unwrap();
        assert!((m.value - 0.4).abs() < 1e-3, "{}", m.value);
    }

    #[test]
    fn scaling_preserves_mass() {
        let c = ConicalSurface::capped(0.7, 1.0).with_perturbation(0.2, 0, 1.0);
        let m1 = cone_mass(&c, &RADII, 16).unwrap().value;
        let m4 = cone_mass(&c.scaled(4.0), &RADII.map(|r| 4.0 * r), 16).unwrap().value;
        assert!((m1 - m4).abs() < 1e-10);
    }

    #[test]
    fn experiments() {
        let surface = ConicalSurface::capped(0.7, 1.0);
        let blow = cone_semicontinuity_experiment(&ConeExperimentConfig::new(
            ConeExperimentKind::BlowUp,
            surface.clone(),
            vec![2, 4, 8, 16],
        ))
        .unwrap();
        assert!(blow.verdict);
        assert!((blow.mass_drop.unwrap() - 0.3).abs() < 1e-8);
        assert!(blow.masses.iter().all(|m| (m - 0.3).abs() < 1e-8));
        let e = blow.fitted_exponent.unwrap();
        assert!((e - 1.0).abs() < 0.15, "{e}");

        let constant = cone_semicontinuity_experiment(&ConeExperimentConfig::new(
            ConeExperimentKind::Constant,
            surface.clone(),
            vec![1, 2, 3],
        ))
        .unwrap();
        assert!(constant.verdict && constant.mass_drop == Some(0.0));

        let esc = cone_semicontinuity_experiment(&ConeExperimentConfig::new(
            ConeExperimentKind::Escaping,
            surface.with_perturbation(0.2, 0, 1.0),
            vec![1, 2, 4, 8],
        ))
        .unwrap();
        assert!(esc.verdict && esc.mass_drop.unwrap() > 0.29);
    }

    #[test]
    fn json_round_trip() {
        let c = ConicalSurface::capped(0.7, 1.0).with_perturbation(0.1, 2, 1.0);
        let s = serde_json::to_string(&c).unwrap();
        assert_eq!(serde_json::from_str::<ConicalSurface>(&s).unwrap(), c);
        let bare: ConicalSurface = serde_json::from_str(r#"{"alpha":0.7}"#).unwrap();
        assert_eq!(bare, ConicalSurface::flat_cone(0.7));
    }
}
