//! Coordinate tensor calculus: inverse metric, Christoffel symbols, Ricci and
//! scalar curvature from a metric and its first two coordinate derivatives.
//! Arrays are flat and row-major.

use nalgebra::{Cholesky, DMatrix};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::Jet;

/// Metric components with first (and optionally second) coordinate
/// derivatives at one point. `dg[k][i][j] = ∂_k g_ij`,
/// `ddg[k][l][i][j] = ∂_k ∂_l g_ij`.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricDerivatives {
    pub dim: usize,
    pub g: Vec<f64>,
    pub dg: Vec<f64>,
    pub ddg: Option<Vec<f64>>,
}

impl MetricDerivatives {
    /// Unpack jets of the components (row-major, `dim × dim`) whose
    /// independent variables are the `dim` coordinates.
    pub fn from_jets(dim: usize, comps: &[Jet], second: bool) -> Self {
        let d = dim;
        let mut g = vec![0.0; d * d];
        let mut dg = vec![0.0; d * d * d];
        let mut ddg = if second {
            Some(vec![0.0; d * d * d * d])
        } else {
            None
        };
        for i in 0..d {
            for j in 0..d {
                let c = &comps[i * d + j];
                g[i * d + j] = c.value;
                for k in 0..d {
                    dg[(k * d + i) * d + j] = c.grad[k];
                    if let Some(h) = ddg.as_mut() {
                        for l in 0..d {
                            h[((k * d + l) * d + i) * d + j] = c.hess[k][l];
                        }
                    }
                }
            }
        }
        MetricDerivatives { dim, g, dg, ddg }
    }

    #[inline]
    pub fn g(&self, i: usize, j: usize) -> f64 {
        self.g[i * self.dim + j]
    }

    #[inline]
    pub fn dg(&self, k: usize, i: usize, j: usize) -> f64 {
        let d = self.dim;
        self.dg[(k * d + i) * d + j]
    }

    #[inline]
    pub fn ddg(&self, k: usize, l: usize, i: usize, j: usize) -> f64 {
        let d = self.dim;
        self.ddg.as_ref().expect("second derivatives not computed")[((k * d + l) * d + i) * d + j]
    }

    pub fn metric_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.dim, self.dim, &self.g)
    }
}

/// Metric and derivatives by second-order central differences of `f`, which
/// returns row-major `dim × dim` components.
pub fn central_differences(
    dim: usize,
    x: &[f64],
    h: f64,
    f: impl Fn(&[f64]) -> Result<Vec<f64>>,
) -> Result<MetricDerivatives> {
    let n = x.len();
    let eval = |shift: &[(usize, f64)]| {
        let mut y = x.to_vec();
        for &(k, s) in shift {
            y[k] += s;
        }
        f(&y)
    };
    let center = eval(&[])?;
    let nn = center.len();
    debug_assert_eq!(nn, dim * dim);
    let mut dg = vec![0.0; n * nn];
    let mut ddg = vec![0.0; n * n * nn];
    for k in 0..n {
        let p = eval(&[(k, h)])?;
        let m = eval(&[(k, -h)])?;
        for c in 0..nn {
            dg[k * nn + c] = (p[c] - m[c]) / (2.0 * h);
            ddg[(k * n + k) * nn + c] = (p[c] - 2.0 * center[c] + m[c]) / (h * h);
        }
        for l in (k + 1)..n {
            let pp = eval(&[(k, h), (l, h)])?;
            let pm = eval(&[(k, h), (l, -h)])?;
            let mp = eval(&[(k, -h), (l, h)])?;
            let mm = eval(&[(k, -h), (l, -h)])?;
            for c in 0..nn {
                let v = (pp[c] - pm[c] - mp[c] + mm[c]) / (4.0 * h * h);
                ddg[(k * n + l) * nn + c] = v;
                ddg[(l * n + k) * nn + c] = v;
            }
        }
    }
    Ok(MetricDerivatives {
        dim,
        g: center,
        dg,
        ddg: Some(ddg),
    })
}

/// Inverse of a symmetric positive definite matrix given row-major. Returns
/// `None` when the Cholesky factorization fails.
pub fn spd_inverse(dim: usize, g: &[f64]) -> Option<Vec<f64>> {
    let m = DMatrix::from_row_slice(dim, dim, g);
    let chol = Cholesky::new(m)?;
    let inv = chol.inverse();
    let mut out = vec![0.0; dim * dim];
    for i in 0..dim {
        for j in 0..dim {
            // average to keep the inverse exactly symmetric
            out[i * dim + j] = 0.5 * (inv[(i, j)] + inv[(j, i)]);
        }
    }
    Some(out)
}

pub fn spd_determinant(dim: usize, g: &[f64]) -> Option<f64> {
    let m = DMatrix::from_row_slice(dim, dim, g);
    let chol = Cholesky::new(m)?;
    let l = chol.l();
    Some((0..dim).map(|i| l[(i, i)] * l[(i, i)]).product())
}

/// `∂_k g^{ij} = -g^{ia} ∂_k g_ab g^{bj}`, flat `[k][i][j]`.
pub fn inverse_derivatives(md: &MetricDerivatives, ginv: &[f64]) -> Vec<f64> {
    let d = md.dim;
    let mut out = vec![0.0; d * d * d];
    let mut tmp = vec![0.0; d * d];
    for k in 0..d {
        // tmp = ∂_k g · g^{-1}
        for a in 0..d {
            for j in 0..d {
                let mut s = 0.0;
                for b in 0..d {
                    s += md.dg(k, a, b) * ginv[b * d + j];
                }
                tmp[a * d + j] = s;
            }
        }
        for i in 0..d {
            for j in 0..d {
                let mut s = 0.0;
                for a in 0..d {
                    s += ginv[i * d + a] * tmp[a * d + j];
                }
                out[(k * d + i) * d + j] = -s;
            }
        }
    }
    out
}

/// Christoffel symbols of the second kind, flat `[k][i][j] = Γ^k_ij`.
pub fn christoffel(md: &MetricDerivatives, ginv: &[f64]) -> Vec<f64> {
    let d = md.dim;
    let lowered = lowered_christoffel(md);
    let mut out = vec![0.0; d * d * d];
    for k in 0..d {
        for i in 0..d {
            for j in i..d {
                let mut s = 0.0;
                for l in 0..d {
                    s += ginv[k * d + l] * lowered[(l * d + i) * d + j];
                }
                out[(k * d + i) * d + j] = s;
                out[(k * d + j) * d + i] = s;
            }
        }
    }
    out
}

/// `Γ_lij = ½(∂_i g_jl + ∂_j g_il − ∂_l g_ij)`, flat `[l][i][j]`.
fn lowered_christoffel(md: &MetricDerivatives) -> Vec<f64> {
    let d = md.dim;
    let mut out = vec![0.0; d * d * d];
    for l in 0..d {
        for i in 0..d {
            for j in i..d {
                let v = 0.5 * (md.dg(i, j, l) + md.dg(j, i, l) - md.dg(l, i, j));
                out[(l * d + i) * d + j] = v;
                out[(l * d + j) * d + i] = v;
            }
        }
    }
    out
}

/// Christoffel symbols, Ricci tensor, and scalar curvature at a point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointwiseCurvature {
    pub dim: usize,
    /// `[k][i][j] = Γ^k_ij`
    pub christoffel: Vec<f64>,
    /// `[i][j] = R_ij`
    pub ricci: Vec<f64>,
    pub scalar: f64,
}

impl PointwiseCurvature {
    pub fn gamma(&self, k: usize, i: usize, j: usize) -> f64 {
        let d = self.dim;
        self.christoffel[(k * d + i) * d + j]
    }

    pub fn ricci(&self, i: usize, j: usize) -> f64 {
        self.ricci[i * self.dim + j]
    }
}

/// Curvature from coordinate formulas. Requires second derivatives.
pub fn curvature(md: &MetricDerivatives) -> Result<PointwiseCurvature> {
    let d = md.dim;
    if md.ddg.is_none() {
        return Err(Error::InvalidInput(
            "curvature needs second metric derivatives".into(),
        ));
    }
    let ginv = spd_inverse(d, &md.g).ok_or_else(|| Error::NotPositiveDefinite {
        point: Vec::new(),
    })?;
    let dginv = inverse_derivatives(md, &ginv);
    let lowered = lowered_christoffel(md);
    let gamma = christoffel(md, &ginv);

    // ∂_m Γ^k_ij, flat [m][k][i][j]
    let mut dgamma = vec![0.0; d * d * d * d];
    for m in 0..d {
        for i in 0..d {
            for j in i..d {
                // ∂_m Γ_lij for all l
                let mut dlow = [0.0; crate::jet::MAX_DIM];
                for (l, slot) in dlow.iter_mut().enumerate().take(d) {
                    *slot = 0.5
                        * (md.ddg(m, i, j, l) + md.ddg(m, j, i, l) - md.ddg(m, l, i, j));
                }
                for k in 0..d {
                    let mut s = 0.0;
                    for l in 0..d {
                        s += dginv[(m * d + k) * d + l] * lowered[(l * d + i) * d + j]
                            + ginv[k * d + l] * dlow[l];
                    }
                    dgamma[((m * d + k) * d + i) * d + j] = s;
                    dgamma[((m * d + k) * d + j) * d + i] = s;
                }
            }
        }
    }
    let gam = |k: usize, i: usize, j: usize| gamma[(k * d + i) * d + j];
    let dgam = |m: usize, k: usize, i: usize, j: usize| dgamma[((m * d + k) * d + i) * d + j];

    // trace Γ^i_im
    let mut trace = vec![0.0; d];
    for (m, t) in trace.iter_mut().enumerate() {
        *t = (0..d).map(|i| gam(i, i, m)).sum();
    }

    let mut ricci = vec![0.0; d * d];
    for j in 0..d {
        for k in j..d {
            let mut s = 0.0;
            for i in 0..d {
                s += dgam(i, i, j, k) - dgam(k, i, i, j);
            }
            for m in 0..d {
                s += gam(m, j, k) * trace[m];
                for i in 0..d {
                    s -= gam(m, i, j) * gam(i, k, m);
                }
            }
            ricci[j * d + k] = s;
            ricci[k * d + j] = s;
        }
    }
    let scalar = (0..d)
        .flat_map(|j| (0..d).map(move |k| (j, k)))
        .map(|(j, k)| ginv[j * d + k] * ricci[j * d + k])
        .sum();
    Ok(PointwiseCurvature {
        dim: d,
        christoffel: gamma,
        ricci,
        scalar,
    })
}
