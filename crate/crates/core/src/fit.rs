//! Extrapolation of quantities defined as limits at infinity.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Condition number above which a least-squares fit is rejected.
const MAX_CONDITION: f64 = 1e10;

/// `c0 + c1 r^{-p}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayModel {
    pub c0: f64,
    pub c1: f64,
    pub p: f64,
}

impl DecayModel {
    pub fn eval(&self, r: f64) -> f64 {
        self.c0 + self.c1 * r.powf(-self.p)
    }
}

/// A second, independent estimate of the same limit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossCheck {
    pub value: f64,
    pub discrepancy: f64,
}

/// Extrapolated value of a quantity sampled at increasing radii.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MassEstimate {
    pub value: f64,
    /// `|last raw − value|` plus the root-mean-square fit residual.
    pub error: f64,
    pub radii: Vec<f64>,
    pub raw: Vec<f64>,
    pub model: DecayModel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cross_check: Option<CrossCheck>,
}

/// Check that radii are positive, finite, strictly increasing and at least
/// three.
pub fn validate_radii(radii: &[f64]) -> Result<()> {
    if radii.len() < 3 {
        return Err(Error::InvalidInput(format!(
            "need at least 3 radii, got {}",
            radii.len()
        )));
    }
    if radii.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
        return Err(Error::InvalidInput("radii must be positive and finite".into()));
    }
    if radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("radii must be strictly increasing".into()));
    }
    Ok(())
}

/// Least-squares coefficients of `y ≈ Σ_k c_k x^{-e_k}`.
///
/// Columns are scaled to unit norm before the solve; a condition number
/// above `1e10` is reported as [`Error::FitIllConditioned`].
pub fn fit_powers(xs: &[f64], ys: &[f64], exponents: &[f64]) -> Result<Vec<f64>> {
    let rows = xs.len();
    let cols = exponents.len();
    if rows < cols || rows != ys.len() {
        return Err(Error::InvalidInput(format!(
            "{rows} samples cannot determine {cols} coefficients"
        )));
    }
    let mut a = DMatrix::<f64>::zeros(rows, cols);
    for (i, &x) in xs.iter().enumerate() {
        for (k, &e) in exponents.iter().enumerate() {
            a[(i, k)] = x.powf(-e);
        }
    }
    let scales: Vec<f64> = (0..cols).map(|k| a.column(k).norm()).collect();
    for (k, &s) in scales.iter().enumerate() {
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::FitIllConditioned(format!("column {k} has norm {s}")));
        }
        a.column_mut(k).scale_mut(1.0 / s);
    }
    let svd = a.svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smin > 0.0) || smax / smin > MAX_CONDITION {
        return Err(Error::FitIllConditioned(format!(
            "condition number {:.3e}",
            smax / smin
        )));
    }
    let b = DVector::from_column_slice(ys);
    let sol = svd
        .solve(&b, 0.0)
        .map_err(|e| Error::FitIllConditioned(e.to_string()))?;
    Ok((0..cols).map(|k| sol[k] / scales[k]).collect())
}

/// Fit `raw(r) ≈ c0 + c1 r^{-p}` and report `c0` as the limit.
pub fn extrapolate(radii: &[f64], raw: &[f64], p: f64) -> Result<MassEstimate> {
    validate_radii(radii)?;
    if raw.len() != radii.len() {
        return Err(Error::InvalidInput("one raw value per radius required".into()));
    }
    if let Some(v) = raw.iter().find(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(format!("raw value {v} is not finite")));
    }
    // clustered radii make the two columns nearly parallel
    if radii[radii.len() - 1] / radii[0] < 1.0 + 1e-6 {
        return Err(Error::FitIllConditioned("radii are clustered".into()));
    }
    let c = fit_powers(radii, raw, &[0.0, p])?;
    let model = DecayModel {
        c0: c[0],
        c1: c[1],
        p,
    };
    let rms = (radii
        .iter()
        .zip(raw)
        .map(|(&r, &y)| (model.eval(r) - y).powi(2))
        .sum::<f64>()
        / radii.len() as f64)
        .sqrt();
    let last = raw[raw.len() - 1];
    Ok(MassEstimate {
        value: model.c0,
        error: (last - model.c0).abs() + rms,
        radii: radii.to_vec(),
        raw: raw.to_vec(),
        model,
        cross_check: None,
    })
}

/// Least-squares slope of `ln y` against `ln x`; `None` when some `y ≤ 0`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() < 2 || ys.iter().any(|&y| !(y > 0.0)) {
        return None;
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let mx = lx.iter().sum::<f64>() / lx.len() as f64;
    let my = ly.iter().sum::<f64>() / ly.len() as f64;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    Some(sxy / sxx)
}
