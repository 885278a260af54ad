//! Closed-form oracles shared by the property and acceptance suites.
#![allow(dead_code)]

use std::f64::consts::PI;

use afmass_core::jet::{norm_sq, Jet};
use afmass_core::metric::ConformalFactor;
use afmass_core::sphere;
use afmass_core::MetricSpec;

/// |S^{n-1}| tabulated by hand for n = 2..=7.
pub fn sphere_area_table(n: usize) -> f64 {
    match n {
        2 => 2.0 * PI,
        3 => 4.0 * PI,
        4 => 2.0 * PI * PI,
        5 => 8.0 * PI * PI / 3.0,
        6 => PI * PI * PI,
        7 => 16.0 * PI * PI * PI / 15.0,
        _ => panic!("no tabulated area for n = {n}"),
    }
}

/// Radial conformal factors with hand-written `U(r)` and `U'(r)`.
#[derive(Clone, Copy, Debug)]
pub enum RadialFactor {
    PointMass { a: f64 },
    Gaussian { amplitude: f64, width: f64 },
}

impl RadialFactor {
    pub fn spec(&self, n: usize) -> MetricSpec {
        let factor = match *self {
            RadialFactor::PointMass { a } => ConformalFactor::PointMass { a },
            RadialFactor::Gaussian { amplitude, width } => {
                ConformalFactor::Gaussian { amplitude, width }
            }
        };
        MetricSpec::conformally_flat(n, factor).unwrap()
    }

    pub fn value_and_slope(&self, n: usize, r: f64) -> (f64, f64) {
        let nf = n as f64;
        match *self {
            RadialFactor::PointMass { a } => {
                (1.0 + a * r.powf(2.0 - nf), (2.0 - nf) * a * r.powf(1.0 - nf))
            }
            RadialFactor::Gaussian { amplitude, width } => {
                let e = amplitude * (-(r * r) / (width * width)).exp();
                (1.0 + e, -2.0 * r / (width * width) * e)
            }
        }
    }

    /// Mean curvature of `S_r` in `U^{4/(n-2)} δ`.
    pub fn mean_curvature(&self, n: usize, r: f64) -> f64 {
        let nf = n as f64;
        let (u, du) = self.value_and_slope(n, r);
        u.powf(-2.0 / (nf - 2.0)) * ((nf - 1.0) / r + 2.0 * (nf - 1.0) / (nf - 2.0) * du / u)
    }

    /// Scalar curvature of `S_r`: a round sphere of radius `U^{2/(n-2)} r`.
    pub fn sphere_scalar_curvature(&self, n: usize, r: f64) -> f64 {
        let nf = n as f64;
        let (u, _) = self.value_and_slope(n, r);
        (nf - 1.0) * (nf - 2.0) / (r * r) * u.powf(-4.0 / (nf - 2.0))
    }
}

pub fn relative_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

/// Max relative deviation of `H` and `ρ` from the conformal oracle at one
/// point.
pub fn conformal_oracle_gap(factor: RadialFactor, n: usize, r: f64, angles: &[f64]) -> f64 {
    let spec = factor.spec(n);
    let h = sphere::mean_curvature_at(&spec, r, angles).unwrap();
    let rho = sphere::intrinsic_scalar_curvature_at(&spec, r, angles).unwrap();
    relative_gap(h, factor.mean_curvature(n, r))
        .max(relative_gap(rho, factor.sphere_scalar_curvature(n, r)))
}

/// A smooth non-radial test function: `sin(x·c) + x₀ |x|² + exp(-|x|²/9)`.
pub fn test_field(coeffs: Vec<f64>) -> impl Fn(&[Jet]) -> Jet + Sync {
    move |x: &[Jet]| {
        let mut dot = Jet::constant(x.len(), 0.0);
        for (xi, c) in x.iter().zip(&coeffs) {
            dot = dot + *xi * *c;
        }
        let r2 = norm_sq(x);
        dot.sin() + x[0] * r2 + (r2 * (-1.0 / 9.0)).exp()
    }
}

/// Relative residual of the flat Laplacian split on `S_r`.
pub fn laplacian_split_gap(coeffs: Vec<f64>, r: f64, angles: &[f64]) -> f64 {
    let f = test_field(coeffs);
    let s = sphere::laplacian_decomposition(&f, r, angles).unwrap();
    let scale = s.ambient.abs() + s.sphere.abs() + s.normal_hessian.abs() + s.radial.abs();
    s.residual().abs() / scale.max(1e-300)
}

/// Angles strictly inside the chart: polar angles in `[0.05, π − 0.05]`.
pub fn angles_from_unit(n: usize, unit: &[f64]) -> Vec<f64> {
    (0..n - 1)
        .map(|k| {
            let t = unit[k];
            if k + 2 < n {
                0.05 + t * (PI - 0.1)
            } else {
                t * 2.0 * PI
            }
        })
        .collect()
}
