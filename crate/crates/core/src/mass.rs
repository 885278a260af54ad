//! ADM flux and mass, the quasi-local quantity `F_g` of coordinate spheres
//! and its limit, and the consistency check `m_ADM ≥ F_g`.
//!
//! Flux-based quantities are evaluated in the asymptotically flat chart of
//! the metric (see [`MetricSpec::asymptotic_chart`]); radii refer to that
//! chart. `F_g` is evaluated on the coordinate spheres of the spec's own
//! chart.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::{self, MassEstimate};
use crate::metric::{self, MetricSpec};
use crate::quadrature::unit_sphere_area;
use crate::sphere::{self, SphericalChart};

fn require_mass_dimension(n: usize) -> Result<()> {
    if n < 3 {
        Err(Error::UnsupportedDimension(n))
    } else {
        Ok(())
    }
}

/// Exponent of the extrapolation model: `min(n − 2, decay order)`, or 1
/// when the family declares no decay order.
pub fn decay_exponent(spec: &MetricSpec) -> f64 {
    let n = spec.n() as f64;
    spec.decay_order().map(|t| t.min(n - 2.0)).unwrap_or(1.0)
}

/// `(1/(2(n−1)ω_{n−1})) ∫_{S_r} Σ(∂_i g_ij − ∂_j g_ii) x^j/r dA_δ` in the
/// asymptotically flat chart.
pub fn adm_flux(spec: &MetricSpec, r: f64, q: usize) -> Result<f64> {
    let n = spec.n();
    require_mass_dimension(n)?;
    let af = spec.asymptotic_chart();
    flux_in_chart(&af, r, q)
}

pub(crate) fn flux_in_chart(spec: &MetricSpec, r: f64, q: usize) -> Result<f64> {
    let n = spec.n();
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidInput(format!("radius must be positive, got {r}")));
    }
    let chart = SphericalChart::new(n, q)?;
    let values: Result<Vec<f64>> = chart
        .nodes()
        .par_iter()
        .map(|node| {
            let x: Vec<f64> = node.direction.iter().map(|d| d * r).collect();
            let md = metric::metric_derivatives_at(spec, &x, 1)?;
            let mut s = 0.0;
            for i in 0..n {
                for j in 0..n {
                    s += (md.dg(i, i, j) - md.dg(j, i, i)) * node.direction[j];
                }
            }
            Ok(node.weight * s)
        })
        .collect();
    let total: f64 = values?.iter().sum();
    let nf = n as f64;
    Ok(total * r.powi(n as i32 - 1) / (2.0 * (nf - 1.0) * unit_sphere_area(n)))
}

/// ADM mass by extrapolating the flux over `radii` with `c0 + c1 r^{-p}`.
pub fn adm_mass(spec: &MetricSpec, radii: &[f64], q: usize) -> Result<MassEstimate> {
    fit::validate_radii(radii)?;
    let raw = radii
        .iter()
        .map(|&r| adm_flux(spec, r, q))
        .collect::<Result<Vec<f64>>>()?;
    fit::extrapolate(radii, &raw, decay_exponent(spec))
}

/// `F_g(S_r)` with the inputs it was computed from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FgValue {
    pub r: f64,
    pub fg: f64,
    pub area: f64,
    #[serde(rename = "maxH2")]
    pub max_h2: f64,
    pub rho_min: f64,
    /// `rho_min > ((n−2)/(n−1)) maxH2`.
    pub hypothesis_holds: bool,
    /// `rho_min − ((n−2)/(n−1)) maxH2`.
    pub hypothesis_margin: f64,
    /// Set when `rho_min < 0`; `fg` is then a signed value outside the
    /// regime of the inequality.
    pub flagged: bool,
}

/// One row of the `fg-profile` table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FgRow {
    pub r: f64,
    pub fg: f64,
    pub area: f64,
    #[serde(rename = "maxH2")]
    pub max_h2: f64,
    pub rho_min: f64,
    pub hypothesis_holds: bool,
}

impl From<&FgValue> for FgRow {
    fn from(v: &FgValue) -> Self {
        FgRow {
            r: v.r,
            fg: v.fg,
            area: v.area,
            max_h2: v.max_h2,
            rho_min: v.rho_min,
            hypothesis_holds: v.hypothesis_holds,
        }
    }
}

/// `½ (|S_r|/ω_{n−1})^{(n−2)/(n−1)} (1 − ((n−2)/(n−1)) maxH²/ρ_min)`.
pub fn fg(spec: &MetricSpec, r: f64, q: usize) -> Result<FgValue> {
    let n = spec.n();
    require_mass_dimension(n)?;
    let rep = sphere::sphere_report(spec, r, q)?;
    fg_from_report(n, &rep)
}

pub fn fg_from_report(n: usize, rep: &sphere::SphereReport) -> Result<FgValue> {
    if rep.rho_min == 0.0 {
        return Err(Error::ZeroRhoMin { r: rep.r });
    }
    let nf = n as f64;
    let ratio = (nf - 2.0) / (nf - 1.0);
    let factor = 0.5 * (rep.area / unit_sphere_area(n)).powf(ratio);
    let margin = rep.rho_min - ratio * rep.max_h2;
    Ok(FgValue {
        r: rep.r,
        fg: factor * (1.0 - ratio * rep.max_h2 / rep.rho_min),
        area: rep.area,
        max_h2: rep.max_h2,
        rho_min: rep.rho_min,
        hypothesis_holds: margin > 0.0,
        hypothesis_margin: margin,
        flagged: rep.rho_min < 0.0,
    })
}

/// `F_g` on every radius, in order.
pub fn fg_profile(spec: &MetricSpec, radii: &[f64], q: usize) -> Result<Vec<FgValue>> {
    if radii.is_empty() {
        return Err(Error::InvalidInput("no radii given".into()));
    }
    radii.iter().map(|&r| fg(spec, r, q)).collect()
}

/// Limit of `F_g(S_r)` by extrapolation with `c0 + c1/r`. Only defined for
/// families that are asymptotically Schwarzschild in their chart.
pub fn fg_limit(spec: &MetricSpec, radii: &[f64], q: usize) -> Result<MassEstimate> {
    if !spec.is_asymptotically_schwarzschild() {
        return Err(Error::InvalidInput(
            "fg_limit needs an asymptotically Schwarzschild chart".into(),
        ));
    }
    fit::validate_radii(radii)?;
    let raw = radii
        .iter()
        .map(|&r| fg(spec, r, q).map(|v| v.fg))
        .collect::<Result<Vec<f64>>>()?;
    fit::extrapolate(radii, &raw, 1.0)
}

/// Outcome of comparing a mass estimate with `F_g(S_r)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PenroseCheck {
    pub hypothesis_holds: bool,
    pub hypothesis_margin: f64,
    pub fg_value: f64,
    pub mass_value: f64,
    /// Tolerance used in the comparison.
    pub error_budget: f64,
    pub inequality_holds: bool,
}

/// Check `m ≥ F_g(S_r)` up to the mass error plus a quadrature allowance.
/// Outward-minimizing of `S_r` is assumed, not verified.
pub fn penrose_like_check(
    spec: &MetricSpec,
    r: f64,
    q: usize,
    mass: &MassEstimate,
) -> Result<PenroseCheck> {
    let n = spec.n();
    if !(3..=7).contains(&n) {
        return Err(Error::UnsupportedDimension(n));
    }
    let f = fg(spec, r, q)?;
    let budget = mass.error + 1e-8 * f.fg.abs().max(1.0);
    Ok(PenroseCheck {
        hypothesis_holds: f.hypothesis_holds,
        hypothesis_margin: f.hypothesis_margin,
        fg_value: f.fg,
        mass_value: mass.value,
        error_budget: budget,
        inequality_holds: mass.value >= f.fg - budget,
    })
}
