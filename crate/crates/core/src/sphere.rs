//! Coordinate spheres `S_r = {|x| = r}`: spherical chart and quadrature,
//! induced metric, area, mean curvature and intrinsic scalar curvature.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::{Jet, ScalarField};
use crate::metric::{self, ChartMetric, DerivativeMode, MetricSpec};
use crate::quadrature::Rule;
use crate::tensor::{self, MetricDerivatives};

/// Default cap on the number of angular nodes of a sphere rule.
pub const DEFAULT_NODE_BUDGET: usize = 20_000;

/// Smallest `sin φ` accepted for a polar angle.
const POLE_TOLERANCE: f64 = 1e-8;

/// One node of the product rule on the unit sphere.
#[derive(Clone, Debug)]
pub struct SphereNode {
    pub angles: Vec<f64>,
    /// Unit vector `x / r`.
    pub direction: Vec<f64>,
    /// Weight for the round measure `dΩ`.
    pub weight: f64,
}

/// Product quadrature on `S^{n-1}` in iterated sine/cosine angles.
///
/// Polar angles use Gauss rules in `cos φ` for the weight `sin^{n-1-α} φ`,
/// the azimuth a `2q`-point trapezoid rule. Nodes never sit on a pole.
#[derive(Clone, Debug)]
pub struct SphericalChart {
    n: usize,
    q: usize,
    nodes: Vec<SphereNode>,
}

type ChartCache = Mutex<HashMap<(usize, usize), Arc<SphericalChart>>>;

fn chart_cache() -> &'static ChartCache {
    static CACHE: OnceLock<ChartCache> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

impl SphericalChart {
    /// Chart with `q` nodes per polar angle, reduced so that the node count
    /// stays within [`DEFAULT_NODE_BUDGET`].
    pub fn new(n: usize, q: usize) -> Result<Arc<SphericalChart>> {
        SphericalChart::with_budget(n, q, DEFAULT_NODE_BUDGET)
    }

    pub fn with_budget(n: usize, q: usize, max_nodes: usize) -> Result<Arc<SphericalChart>> {
        if !(2..=crate::jet::MAX_DIM).contains(&n) {
            return Err(Error::UnsupportedDimension(n));
        }
        if q == 0 {
            return Err(Error::InvalidInput("quadrature resolution q must be positive".into()));
        }
        let q = effective_resolution(n, q, max_nodes);
        let mut cache = chart_cache().lock().expect("chart cache poisoned");
        Ok(cache
            .entry((n, q))
            .or_insert_with(|| Arc::new(SphericalChart::build(n, q)))
            .clone())
    }

    fn build(n: usize, q: usize) -> SphericalChart {
        let polar: Vec<Rule> = (1..n - 1)
            .map(|alpha| Rule::gauss_gegenbauer(q, (n as f64 - 2.0 - alpha as f64) / 2.0))
            .collect();
        let m = 2 * q;
        let azimuth: Vec<f64> = (0..m).map(|k| (k as f64 + 0.5) * 2.0 * PI / m as f64).collect();
        let az_weight = 2.0 * PI / m as f64;

        let mut nodes = Vec::with_capacity(q.pow((n - 2) as u32) * m);
        let mut index = vec![0usize; n - 2];
        loop {
            let mut angles = Vec::with_capacity(n - 1);
            let mut weight = az_weight;
            for (rule, &k) in polar.iter().zip(&index) {
                angles.push(rule.nodes[k].acos());
                weight *= rule.weights[k];
            }
            for &phi in &azimuth {
                let mut a = angles.clone();
                a.push(phi);
                nodes.push(SphereNode {
                    direction: direction(&a),
                    angles: a,
                    weight,
                });
            }
            // odometer over the polar indices
            let mut slot = 0;
            loop {
                if slot == index.len() {
                    return SphericalChart { n, q, nodes };
                }
                index[slot] += 1;
                if index[slot] < q {
                    break;
                }
                index[slot] = 0;
                slot += 1;
            }
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Nodes per polar angle actually used.
    pub fn resolution(&self) -> usize {
        self.q
    }

    pub fn nodes(&self) -> &[SphereNode] {
        &self.nodes
    }

    /// `∫_{S^{n-1}} f dΩ` with a fixed-order reduction.
    pub fn integrate(&self, f: impl Fn(&SphereNode) -> f64 + Sync) -> f64 {
        let values: Vec<f64> = self.nodes.par_iter().map(|node| node.weight * f(node)).collect();
        values.iter().sum()
    }
}

/// Largest resolution `≤ q` whose product rule has at most `max_nodes`
/// nodes (`2 q^{n-1}` nodes in dimension `n`).
pub fn effective_resolution(n: usize, q: usize, max_nodes: usize) -> usize {
    let mut q_eff = q;
    while q_eff > 1 && 2 * q_eff.pow((n - 1) as u32) > max_nodes {
        q_eff -= 1;
    }
    q_eff
}

/// Unit vector for iterated sine/cosine angles:
/// `x¹ = cos φ¹, x² = sin φ¹ cos φ², …, xⁿ = sin φ¹ ⋯ sin φ^{n-1}`.
pub fn direction(angles: &[f64]) -> Vec<f64> {
    let n = angles.len() + 1;
    let mut out = Vec::with_capacity(n);
    let mut prod = 1.0;
    for &a in angles {
        out.push(prod * a.cos());
        prod *= a.sin();
    }
    out.push(prod);
    out
}

fn check_angles(n: usize, angles: &[f64]) -> Result<()> {
    if angles.len() + 1 != n {
        return Err(Error::InvalidInput(format!(
            "expected {} angles, got {}",
            n - 1,
            angles.len()
        )));
    }
    for &a in &angles[..n - 2] {
        if a.sin().abs() < POLE_TOLERANCE {
            return Err(Error::PoleEvaluation { angle: a });
        }
    }
    Ok(())
}

fn check_radius(r: f64) -> Result<()> {
    if r > 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("radius must be positive, got {r}")))
    }
}

/// Point `r · direction` and tangent vectors `∂x/∂φ^α`, all as jets in the
/// angles.
fn embedding_jets(r: f64, angles: &[f64]) -> (Vec<Jet>, Vec<Vec<Jet>>) {
    let m = angles.len();
    let n = m + 1;
    let phi = Jet::point(angles);
    let sines: Vec<Jet> = phi.iter().map(Jet::sin).collect();
    let cosines: Vec<Jet> = phi.iter().map(Jet::cos).collect();
    // x^i = r Π_{β<i} sin φ^β · (cos φ^i if i < m)
    let coordinate = |i: usize, diff: Option<usize>| -> Jet {
        let mut acc = Jet::constant(m, r);
        for beta in 0..i.min(m) {
            let factor = if diff == Some(beta) { cosines[beta] } else { sines[beta] };
            acc = acc * factor;
        }
        if i < m {
            let factor = if diff == Some(i) { -sines[i] } else { cosines[i] };
            acc = acc * factor;
        }
        acc
    };
    let x: Vec<Jet> = (0..n).map(|i| coordinate(i, None)).collect();
    let tangents: Vec<Vec<Jet>> = (0..m)
        .map(|alpha| {
            (0..n)
                .map(|i| {
                    if alpha <= i {
                        coordinate(i, Some(alpha))
                    } else {
                        Jet::constant(m, 0.0)
                    }
                })
                .collect()
        })
        .collect();
    (x, tangents)
}

/// `γ_αβ = E_α^i g_ij E_β^j` as jets in the angles.
fn induced_jets(
    metric: &(impl ChartMetric + ?Sized),
    r: f64,
    angles: &[f64],
) -> Result<Vec<Jet>> {
    let m = angles.len();
    let n = m + 1;
    let (x, tangents) = embedding_jets(r, angles);
    let g = metric.components(&x)?;
    // W_{iβ} = g_ij E_β^j
    let mut w = vec![Jet::constant(m, 0.0); n * m];
    for i in 0..n {
        for beta in 0..m {
            let mut acc = Jet::constant(m, 0.0);
            for j in beta..n {
                acc.add_product(&g[i * n + j], &tangents[beta][j]);
            }
            w[i * m + beta] = acc;
        }
    }
    let mut gamma = vec![Jet::constant(m, 0.0); m * m];
    for alpha in 0..m {
        for beta in alpha..m {
            let mut acc = Jet::constant(m, 0.0);
            for i in alpha..n {
                acc.add_product(&tangents[alpha][i], &w[i * m + beta]);
            }
            gamma[alpha * m + beta] = acc;
            gamma[beta * m + alpha] = acc;
        }
    }
    Ok(gamma)
}

/// Induced metric `γ_αβ = g(∂_α, ∂_β)` on `S_r` at the given angles.
pub fn induced_metric_at(spec: &MetricSpec, r: f64, angles: &[f64]) -> Result<DMatrix<f64>> {
    let n = spec.n();
    check_radius(r)?;
    check_angles(n, angles)?;
    let g = induced_values(spec, r, angles)?;
    let m = n - 1;
    Ok(DMatrix::from_row_slice(m, m, &g))
}

fn induced_values(spec: &MetricSpec, r: f64, angles: &[f64]) -> Result<Vec<f64>> {
    let n = spec.n();
    let m = n - 1;
    let x: Vec<f64> = direction(angles).iter().map(|d| d * r).collect();
    let g = metric::metric_at(spec, &x)?;
    let (_, tangents) = embedding_jets(r, angles);
    let mut out = vec![0.0; m * m];
    for a in 0..m {
        for b in 0..m {
            let mut s = 0.0;
            for i in 0..n {
                for j in 0..n {
                    s += tangents[a][i].value * g[(i, j)] * tangents[b][j].value;
                }
            }
            out[a * m + b] = s;
        }
    }
    Ok(out)
}

/// Area density of `S_r` against the round measure `dΩ`:
/// `√det g · |dF|_g · r^{n-1}` with `F = |x|`.
fn area_density(n: usize, g: &[f64], omega: &[f64], r: f64) -> Result<f64> {
    let ginv = tensor::spd_inverse(n, g).ok_or_else(|| Error::NotPositiveDefinite {
        point: omega.iter().map(|w| w * r).collect(),
    })?;
    let det = tensor::spd_determinant(n, g).unwrap_or(0.0);
    let mut norm_sq = 0.0;
    for i in 0..n {
        for j in 0..n {
            norm_sq += ginv[i * n + j] * omega[i] * omega[j];
        }
    }
    Ok(det.sqrt() * norm_sq.sqrt() * r.powi(n as i32 - 1))
}

/// Area of `S_r` by the product rule at resolution `q`.
pub fn sphere_area(spec: &MetricSpec, r: f64, q: usize) -> Result<f64> {
    let n = spec.n();
    check_radius(r)?;
    let chart = SphericalChart::new(n, q)?;
    let values: Result<Vec<f64>> = chart
        .nodes()
        .par_iter()
        .map(|node| {
            let x: Vec<f64> = node.direction.iter().map(|d| d * r).collect();
            let g = metric::metric_at(spec, &x)?;
            let g: Vec<f64> = g.transpose().as_slice().to_vec();
            Ok(node.weight * area_density(n, &g, &node.direction, r)?)
        })
        .collect();
    Ok(values?.iter().sum())
}

/// Mean curvature `div_g(∇F/|∇F|_g)` of the level set of `F = |x|` through
/// `x`, from the metric and its first derivatives.
pub fn mean_curvature_from(md: &MetricDerivatives, x: &[f64]) -> Result<f64> {
    let n = md.dim;
    let r = x.iter().map(|a| a * a).sum::<f64>().sqrt();
    let omega: Vec<f64> = x.iter().map(|a| a / r).collect();
    let ginv = tensor::spd_inverse(n, &md.g)
        .ok_or_else(|| Error::NotPositiveDefinite { point: x.to_vec() })?;
    let dginv = tensor::inverse_derivatives(md, &ginv);
    // F_i = ω_i, F_ij = (δ_ij − ω_i ω_j)/r
    let hess_f = |i: usize, j: usize| ((i == j) as u8 as f64 - omega[i] * omega[j]) / r;

    let w: Vec<f64> = (0..n)
        .map(|i| (0..n).map(|j| ginv[i * n + j] * omega[j]).sum())
        .collect();
    let s2: f64 = (0..n).map(|i| omega[i] * w[i]).sum();
    if !(s2 > 0.0) || !s2.is_finite() {
        return Err(Error::DegenerateNormal { point: x.to_vec() });
    }
    let s = s2.sqrt();
    // dw[k][i] = ∂_k w^i
    let mut dw = vec![0.0; n * n];
    for k in 0..n {
        for i in 0..n {
            let mut v = 0.0;
            for j in 0..n {
                v += dginv[(k * n + i) * n + j] * omega[j] + ginv[i * n + j] * hess_f(j, k);
            }
            dw[k * n + i] = v;
        }
    }
    let ds: Vec<f64> = (0..n)
        .map(|k| {
            let mut v = 0.0;
            for i in 0..n {
                v += hess_f(i, k) * w[i] + omega[i] * dw[k * n + i];
            }
            v / (2.0 * s)
        })
        .collect();
    // Γ^i_ik = ½ g^{ij} ∂_k g_ij
    let trace: Vec<f64> = (0..n)
        .map(|k| {
            let mut v = 0.0;
            for i in 0..n {
                for j in 0..n {
                    v += ginv[i * n + j] * md.dg(k, i, j);
                }
            }
            0.5 * v
        })
        .collect();
    let mut h = 0.0;
    for i in 0..n {
        h += dw[i * n + i] / s - w[i] * ds[i] / s2 + trace[i] * w[i] / s;
    }
    Ok(h)
}

/// Mean curvature of `S_r` at the given angles, positive for round spheres
/// with the normal pointing toward increasing `r`.
pub fn mean_curvature_at(spec: &MetricSpec, r: f64, angles: &[f64]) -> Result<f64> {
    check_radius(r)?;
    check_angles(spec.n(), angles)?;
    let x: Vec<f64> = direction(angles).iter().map(|d| d * r).collect();
    let md = metric::metric_derivatives_at(spec, &x, 1)?;
    mean_curvature_from(&md, &x)
}

/// Intrinsic scalar curvature of `(S_r, γ)` at the given angles.
pub fn intrinsic_scalar_curvature_at(spec: &MetricSpec, r: f64, angles: &[f64]) -> Result<f64> {
    check_radius(r)?;
    check_angles(spec.n(), angles)?;
    intrinsic_unchecked(spec, r, angles)
}

fn intrinsic_unchecked(spec: &MetricSpec, r: f64, angles: &[f64]) -> Result<f64> {
    let m = angles.len();
    let md = match spec.derivative_mode() {
        DerivativeMode::Analytic => {
            MetricDerivatives::from_jets(m, &induced_jets(spec, r, angles)?, true)
        }
        DerivativeMode::FiniteDifference { step } => {
            let h = step.map(|s| s / r).unwrap_or(f64::EPSILON.powf(0.25));
            tensor::central_differences(m, angles, h, |phi| induced_values(spec, r, phi))?
        }
    };
    Ok(tensor::curvature(&md)?.scalar)
}

/// Area, mean-curvature and scalar-curvature extrema of `S_r` over the nodes
/// of the sphere rule.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SphereReport {
    pub r: f64,
    pub area: f64,
    #[serde(rename = "H_min")]
    pub h_min: f64,
    #[serde(rename = "H_max")]
    pub h_max: f64,
    #[serde(rename = "maxH2")]
    pub max_h2: f64,
    pub rho_min: f64,
    pub rho_max: f64,
    /// Nodes per polar angle actually used.
    pub q: usize,
}

/// Per-node quantities on `S_r`.
#[derive(Clone, Copy, Debug)]
pub struct NodeGeometry {
    pub weight: f64,
    pub area_density: f64,
    pub mean_curvature: f64,
    pub scalar_curvature: f64,
}

/// Evaluate area density, `H` and `ρ` at every node of the sphere rule.
pub fn sphere_nodes(spec: &MetricSpec, r: f64, q: usize) -> Result<(usize, Vec<NodeGeometry>)> {
    let n = spec.n();
    check_radius(r)?;
    let chart = SphericalChart::new(n, q)?;
    let values: Result<Vec<NodeGeometry>> = chart
        .nodes()
        .par_iter()
        .map(|node| {
            let x: Vec<f64> = node.direction.iter().map(|d| d * r).collect();
            let md = metric::metric_derivatives_at(spec, &x, 1)?;
            Ok(NodeGeometry {
                weight: node.weight,
                area_density: area_density(n, &md.g, &node.direction, r)?,
                mean_curvature: mean_curvature_from(&md, &x)?,
                scalar_curvature: if n >= 3 {
                    intrinsic_unchecked(spec, r, &node.angles)?
                } else {
                    0.0
                },
            })
        })
        .collect();
    Ok((chart.resolution(), values?))
}

pub fn sphere_report(spec: &MetricSpec, r: f64, q: usize) -> Result<SphereReport> {
    let (q_eff, nodes) = sphere_nodes(spec, r, q)?;
    Ok(report_from_nodes(r, q_eff, &nodes))
}

pub(crate) fn report_from_nodes(r: f64, q: usize, nodes: &[NodeGeometry]) -> SphereReport {
    let mut report = SphereReport {
        r,
        area: 0.0,
        h_min: f64::INFINITY,
        h_max: f64::NEG_INFINITY,
        max_h2: 0.0,
        rho_min: f64::INFINITY,
        rho_max: f64::NEG_INFINITY,
        q,
    };
    for node in nodes {
        report.area += node.weight * node.area_density;
        report.h_min = report.h_min.min(node.mean_curvature);
        report.h_max = report.h_max.max(node.mean_curvature);
        report.max_h2 = report.max_h2.max(node.mean_curvature * node.mean_curvature);
        report.rho_min = report.rho_min.min(node.scalar_curvature);
        report.rho_max = report.rho_max.max(node.scalar_curvature);
    }
    report
}

/// Round-measure averages of `H` and `ρ` over `S_r`.
pub fn sphere_means(spec: &MetricSpec, r: f64, q: usize) -> Result<(f64, f64)> {
    let (_, nodes) = sphere_nodes(spec, r, q)?;
    let total: f64 = nodes.iter().map(|g| g.weight).sum();
    let h = nodes.iter().map(|g| g.weight * g.mean_curvature).sum::<f64>() / total;
    let rho = nodes.iter().map(|g| g.weight * g.scalar_curvature).sum::<f64>() / total;
    Ok((h, rho))
}

/// Pieces of `Δf = Δ_{S_r} f + Hess f(ν, ν) + (n−1)/r · ∂_r f` at a point,
/// each computed independently in the flat metric.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LaplacianSplit {
    pub ambient: f64,
    pub sphere: f64,
    pub normal_hessian: f64,
    pub radial: f64,
}

impl LaplacianSplit {
    pub fn residual(&self) -> f64 {
        self.ambient - self.sphere - self.normal_hessian - self.radial
    }
}

/// Split the flat Laplacian of `f` at `r · direction(angles)`.
pub fn laplacian_decomposition(
    f: &impl ScalarField,
    r: f64,
    angles: &[f64],
) -> Result<LaplacianSplit> {
    let n = angles.len() + 1;
    check_radius(r)?;
    check_angles(n, angles)?;
    let omega = direction(angles);
    let x: Vec<f64> = omega.iter().map(|d| d * r).collect();
    let fx = f.eval(&Jet::point(&x));
    let ambient = (0..n).map(|i| fx.hess[i][i]).sum();
    let mut normal_hessian = 0.0;
    let mut radial = 0.0;
    for i in 0..n {
        radial += omega[i] * fx.grad[i];
        for j in 0..n {
            normal_hessian += omega[i] * fx.hess[i][j] * omega[j];
        }
    }
    radial *= (n as f64 - 1.0) / r;

    // Δ_S f = γ^{αβ}(∂_α∂_β f − Γ^κ_αβ ∂_κ f) in the round metric of radius r
    let m = n - 1;
    let euclid = MetricSpec::euclidean(n);
    let gamma = MetricDerivatives::from_jets(m, &induced_jets(&euclid, r, angles)?, false);
    let ginv = tensor::spd_inverse(m, &gamma.g)
        .ok_or_else(|| Error::NotPositiveDefinite { point: x.clone() })?;
    let chris = tensor::christoffel(&gamma, &ginv);
    let (xj, _) = embedding_jets(r, angles);
    let fphi = f.eval(&xj);
    let mut sphere = 0.0;
    for a in 0..m {
        for b in 0..m {
            let mut v = fphi.hess[a][b];
            for k in 0..m {
                v -= chris[(k * m + a) * m + b] * fphi.grad[k];
            }
            sphere += ginv[a * m + b] * v;
        }
    }
    Ok(LaplacianSplit {
        ambient,
        sphere,
        normal_hessian,
        radial,
    })
}

/// Closed-form mean curvature of `S_r` for `U^{4/(n-2)} δ`:
/// `U^{-2/(n-2)}(n−1)/r + (2(n−1)/(n−2)) U^{-n/(n-2)} ∂_r U`.
pub fn conformal_mean_curvature(n: usize, r: f64, u: f64, du_dr: f64) -> f64 {
    let nf = n as f64;
    u.powf(-2.0 / (nf - 2.0)) * (nf - 1.0) / r
        + 2.0 * (nf - 1.0) / (nf - 2.0) * u.powf(-nf / (nf - 2.0)) * du_dr
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::ConformalFactor;
    use crate::quadrature::unit_sphere_area;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn budget_reduces_resolution() {
        assert_eq!(effective_resolution(3, 32, DEFAULT_NODE_BUDGET), 32);
        assert_eq!(effective_resolution(7, 32, DEFAULT_NODE_BUDGET), 4);
        assert!(2 * 21usize.pow(3) <= DEFAULT_NODE_BUDGET);
        let chart = SphericalChart::new(4, 32).unwrap();
        assert!(chart.nodes().len() <= DEFAULT_NODE_BUDGET);
    }

    #[test]
    fn weights_positive_and_unit_area_exact() {
        for n in 2..=7 {
            let chart = SphericalChart::new(n, 24).unwrap();
            assert!(chart.nodes().iter().all(|node| node.weight > 0.0));
            let area = chart.integrate(|_| 1.0);
            assert!(rel(area, unit_sphere_area(n)) < 1e-10, "n={n}");
        }
    }

    #[test]
    fn rule_integrates_low_degree_polynomials() {
        // ∫ x_1² dΩ = ω/n, ∫ x_1 x_2 dΩ = 0
        let chart = SphericalChart::new(5, 8).unwrap();
        let v = chart.integrate(|node| node.direction[0].powi(2));
        assert!(rel(v, unit_sphere_area(5) / 5.0) < 1e-12);
        let w = chart.integrate(|node| node.direction[2] * node.direction[4]);
        assert!(w.abs() < 1e-13);
    }

    #[test]
    fn induced_metric_examples() {
        let r = 3.0;
        let g = induced_metric_at(&MetricSpec::euclidean(3), r, &[PI / 2.0, 0.4]).unwrap();
        assert!((g[(0, 0)] - 9.0).abs() < 1e-13 && (g[(1, 1)] - 9.0).abs() < 1e-13);
        assert!(g[(0, 1)].abs() < 1e-13);

        let s = MetricSpec::schwarzschild(3, 1.0).unwrap();
        let gs = induced_metric_at(&s, 10.0, &[1.1, 0.4]).unwrap();
        let ge = induced_metric_at(&MetricSpec::euclidean(3), 10.0, &[1.1, 0.4]).unwrap();
        assert!(((gs - ge * 1.21550625).abs()).max() < 1e-11);

        let cone = MetricSpec::new(
            2,
            crate::metric::Family::Cone2D(crate::cone2d::ConicalSurface::flat_cone(0.7)),
        )
        .unwrap();
        let gc = induced_metric_at(&cone, 2.0, &[0.3]).unwrap();
        assert!((gc[(0, 0)] - 1.96).abs() < 1e-13);
    }

    #[test]
    fn pole_is_rejected() {
        assert!(matches!(
            induced_metric_at(&MetricSpec::euclidean(3), 1.0, &[0.0, 0.3]),
            Err(Error::PoleEvaluation { .. })
        ));
    }

    #[test]
    fn areas() {
        let a = sphere_area(&MetricSpec::euclidean(3), 2.0, 32).unwrap();
        assert!(rel(a, 16.0 * PI) < 1e-12);
        let s = sphere_area(&MetricSpec::schwarzschild(3, 1.0).unwrap(), 10.0, 32).unwrap();
        assert!(rel(s, 1.21550625 * 400.0 * PI) < 1e-12);
        assert!((s - 1527.4502).abs() < 1e-4);
        // U = 1 + a/r: area/(ω r²) − 1 ≈ 4a/r
        let a_coef = 0.3;
        let r = 1000.0;
        let hf = MetricSpec::conformally_flat(3, ConformalFactor::PointMass { a: a_coef }).unwrap();
        let ratio = sphere_area(&hf, r, 16).unwrap() / (4.0 * PI * r * r) - 1.0;
        assert!(rel(ratio, 4.0 * a_coef / r) < 2e-3);
    }

    #[test]
    fn mean_curvature_examples() {
        for n in 2..=6 {
            let h = mean_curvature_at(&MetricSpec::euclidean(n), 4.0, &vec![0.9; n - 1]).unwrap();
            assert!(rel(h, (n as f64 - 1.0) / 4.0) < 1e-14);
        }
        let s = MetricSpec::schwarzschild(3, 1.0).unwrap();
        let h = mean_curvature_at(&s, 10.0, &[0.7, 2.0]).unwrap();
        let oracle = (0.2 + 4.0 * -0.005 / 1.05) / (1.05 * 1.05);
        assert!(rel(h, oracle) < 1e-13 && (h - 0.1641291).abs() < 1e-7);
        assert!(rel(h, conformal_mean_curvature(3, 10.0, 1.05, -0.005)) < 1e-13);
    }

    #[test]
    fn intrinsic_curvature_examples() {
        let e = intrinsic_scalar_curvature_at(&MetricSpec::euclidean(3), 5.0, &[1.0, 0.2]).unwrap();
        assert!((e - 0.08).abs() < 1e-14);
        let s = MetricSpec::schwarzschild(3, 1.0).unwrap();
        let rho = intrinsic_scalar_curvature_at(&s, 10.0, &[0.6, 4.0]).unwrap();
        assert!(rel(rho, 0.02 / 1.05f64.powi(4)) < 1e-12);
        for n in 3..=7 {
            let v = intrinsic_scalar_curvature_at(&MetricSpec::euclidean(n), 2.0, &vec![1.2; n - 1])
                .unwrap();
            let nf = n as f64;
            assert!(rel(v, (nf - 1.0) * (nf - 2.0) / 4.0) < 1e-12, "n={n}");
        }
    }

    #[test]
    fn finite_difference_mode_matches_analytic() {
        let s = MetricSpec::asymptotically_schwarzschild(3, 1.0, 0.4).unwrap();
        let fd = s
            .clone()
            .with_derivative_mode(DerivativeMode::FiniteDifference { step: None })
            .unwrap();
        let angles = [1.0, 0.5];
        let a = intrinsic_scalar_curvature_at(&s, 3.0, &angles).unwrap();
        let b = intrinsic_scalar_curvature_at(&fd, 3.0, &angles).unwrap();
        assert!(rel(b, a) < 1e-6, "{a} vs {b}");
        let ha = mean_curvature_at(&s, 3.0, &angles).unwrap();
        let hb = mean_curvature_at(&fd, 3.0, &angles).unwrap();
        assert!(rel(hb, ha) < 1e-8);
    }

    #[test]
    fn report_examples() {
        let rep = sphere_report(&MetricSpec::euclidean(4), 3.0, 12).unwrap();
        assert!(rel(rep.area, 2.0 * PI * PI * 27.0) < 1e-12);
        assert!((rep.h_min - 1.0).abs() < 1e-13 && (rep.h_max - 1.0).abs() < 1e-13);
        assert!((rep.rho_min - 6.0 / 9.0).abs() < 1e-12);
        assert!((rep.rho_max - 6.0 / 9.0).abs() < 1e-12);

        let s = sphere_report(&MetricSpec::schwarzschild(3, 1.0).unwrap(), 10.0, 16).unwrap();
        assert!(s.h_max - s.h_min <= 1e-10);

        let p = sphere_report(
            &MetricSpec::asymptotically_schwarzschild(3, 1.0, 2.0).unwrap(),
            5.0,
            16,
        )
        .unwrap();
        assert!(p.h_max > p.h_min);
        assert!(p.rho_min <= p.rho_max);
    }

    #[test]
    fn max_h2_uses_node_squares_when_sign_changes() {
        let nodes = [
            NodeGeometry {
                weight: 1.0,
                area_density: 1.0,
                mean_curvature: -3.0,
                scalar_curvature: 1.0,
            },
            NodeGeometry {
                weight: 1.0,
                area_density: 1.0,
                mean_curvature: 2.0,
                scalar_curvature: 1.0,
            },
        ];
        let rep = report_from_nodes(1.0, 1, &nodes);
        assert_eq!(rep.max_h2, 9.0);
        assert_eq!((rep.h_min, rep.h_max), (-3.0, 2.0));
    }

    #[test]
    fn laplacian_decomposition_of_harmonic_factor() {
        let spec = MetricSpec::conformally_flat(4, ConformalFactor::PointMass { a: 0.8 }).unwrap();
        let u = |x: &[Jet]| spec.conformal_factor(x).unwrap();
        let split = laplacian_decomposition(&u, 2.5, &[0.4, 1.9, 5.0]).unwrap();
        assert!(split.ambient.abs() < 1e-13);
        assert!(split.residual().abs() < 1e-12);
        // non-radial test function
        let f = |x: &[Jet]| x[0] * x[1] * x[1] + x[2].sin();
        let split = laplacian_decomposition(&f, 1.7, &[0.8, 2.1]).unwrap();
        assert!(split.residual().abs() < 1e-12);
        assert!(split.sphere.abs() > 1e-3);
    }
}
