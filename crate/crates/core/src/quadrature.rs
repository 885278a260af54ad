//! One-dimensional quadrature rules and Chebyshev interpolation.

use nalgebra::{DMatrix, SymmetricEigen};
use std::f64::consts::PI;

/// Γ(k/2) for a positive integer `k`, by the half-integer recurrence.
pub fn gamma_half(k: usize) -> f64 {
    assert!(k > 0, "gamma_half needs k >= 1");
    let (mut value, mut arg) = if k % 2 == 0 {
        (1.0, 2usize)
    } else {
        (PI.sqrt(), 1usize)
    };
    while arg < k {
        value *= arg as f64 / 2.0;
        arg += 2;
    }
    value
}

/// Area of the unit sphere S^{n-1} ⊂ ℝⁿ: 2π^{n/2}/Γ(n/2).
pub fn unit_sphere_area(n: usize) -> f64 {
    2.0 * PI.powf(n as f64 / 2.0) / gamma_half(n)
}

/// Nodes and weights of a rule on a reference interval.
#[derive(Clone, Debug)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    /// Gauss–Legendre rule on [-1, 1], nodes by Newton iteration.
    pub fn gauss_legendre(q: usize) -> Rule {
        assert!(q >= 1);
        let mut nodes = vec![0.0; q];
        let mut weights = vec![0.0; q];
        let m = q.div_ceil(2);
        for i in 0..m {
            let mut x = (PI * (i as f64 + 0.75) / (q as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(q, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(q, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[q - 1 - i] = x;
            weights[i] = w;
            weights[q - 1 - i] = w;
        }
        if q % 2 == 1 {
            nodes[q / 2] = 0.0;
        }
        Rule { nodes, weights }
    }

    /// Gauss rule for the weight (1 - t²)^λ on [-1, 1] (Gegenbauer), by
    /// Golub–Welsch. λ = 0 reproduces Gauss–Legendre.
    pub fn gauss_gegenbauer(q: usize, lambda: f64) -> Rule {
        assert!(q >= 1 && lambda > -1.0);
        if lambda == 0.0 {
            return Rule::gauss_legendre(q);
        }
        let mut jacobi = DMatrix::<f64>::zeros(q, q);
        for j in 1..q {
            let jf = j as f64;
            let s = jf + lambda;
            let b = (jf * (jf + 2.0 * lambda) / (4.0 * s * s - 1.0)).sqrt();
            jacobi[(j - 1, j)] = b;
            jacobi[(j, j - 1)] = b;
        }
        // ∫ (1 - t²)^λ dt = √π Γ(λ+1) / Γ(λ+3/2)
        let mu0 = beta_half_moment(lambda);
        let eig = SymmetricEigen::new(jacobi);
        let mut pairs: Vec<(f64, f64)> = (0..q)
            .map(|i| {
                let v0 = eig.eigenvectors[(0, i)];
                (eig.eigenvalues[i], mu0 * v0 * v0)
            })
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        // Symmetrize to remove eigen-solver round-off.
        for i in 0..q / 2 {
            let k = q - 1 - i;
            let x = 0.5 * (pairs[k].0 - pairs[i].0);
            let w = 0.5 * (pairs[k].1 + pairs[i].1);
            pairs[i] = (-x, w);
            pairs[k] = (x, w);
        }
        if q % 2 == 1 {
            pairs[q / 2].0 = 0.0;
        }
        Rule {
            nodes: pairs.iter().map(|p| p.0).collect(),
            weights: pairs.iter().map(|p| p.1).collect(),
        }
    }

    /// Map the rule from [-1, 1] to [a, b].
    pub fn mapped(&self, a: f64, b: f64) -> Rule {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        Rule {
            nodes: self.nodes.iter().map(|&t| mid + half * t).collect(),
            weights: self.weights.iter().map(|&w| w * half).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

fn legendre_with_derivative(q: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=q {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = q as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// ∫_{-1}^{1} (1 - t²)^λ dt for λ a non-negative multiple of 1/2.
fn beta_half_moment(lambda: f64) -> f64 {
    let twice = (2.0 * lambda).round() as usize;
    debug_assert!((twice as f64 - 2.0 * lambda).abs() < 1e-12);
    // Γ(λ+1) = Γ((2λ+2)/2), Γ(λ+3/2) = Γ((2λ+3)/2)
    PI.sqrt() * gamma_half(twice + 2) / gamma_half(twice + 3)
}

/// Composite Gauss–Legendre over consecutive breakpoints.
pub fn composite(breaks: &[f64], q: usize) -> Rule {
    let base = Rule::gauss_legendre(q);
    let mut nodes = Vec::with_capacity(q * breaks.len());
    let mut weights = Vec::with_capacity(q * breaks.len());
    for w in breaks.windows(2) {
        let r = base.mapped(w[0], w[1]);
        nodes.extend(r.nodes);
        weights.extend(r.weights);
    }
    Rule { nodes, weights }
}

/// Adaptive Gauss–Legendre: bisect until a 10-point panel agrees with its two
/// halves to `tol` (absolute, scaled by panel share).
pub fn adaptive(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let rule = Rule::gauss_legendre(10);
    let whole = rule.mapped(a, b).integrate(f);
    adaptive_step(f, &rule, a, b, whole, tol, 0)
}

fn adaptive_step(
    f: &impl Fn(f64) -> f64,
    rule: &Rule,
    a: f64,
    b: f64,
    whole: f64,
    tol: f64,
    depth: usize,
) -> f64 {
    let mid = 0.5 * (a + b);
    let left = rule.mapped(a, mid).integrate(f);
    let right = rule.mapped(mid, b).integrate(f);
    // below round-off the halves cannot agree any better
    let floor = 8.0 * f64::EPSILON * (left.abs() + right.abs());
    if (left + right - whole).abs() <= tol.max(floor) || depth >= 30 {
        return left + right;
    }
    adaptive_step(f, rule, a, mid, left, 0.5 * tol, depth + 1)
        + adaptive_step(f, rule, mid, b, right, 0.5 * tol, depth + 1)
}

/// Chebyshev interpolant on [a, b] through Chebyshev points of the first kind.
#[derive(Clone, Debug)]
pub struct Chebyshev {
    a: f64,
    b: f64,
    coeffs: Vec<f64>,
}

impl Chebyshev {
    /// Interpolation points for `count` coefficients on [a, b].
    pub fn points(a: f64, b: f64, count: usize) -> Vec<f64> {
        (0..count)
            .map(|k| {
                let t = (PI * (k as f64 + 0.5) / count as f64).cos();
                0.5 * (a + b) + 0.5 * (b - a) * t
            })
            .collect()
    }

    /// Fit from samples taken at [`Chebyshev::points`].
    pub fn from_samples(a: f64, b: f64, samples: &[f64]) -> Chebyshev {
        let n = samples.len();
        let coeffs = (0..n)
            .map(|j| {
                let s: f64 = samples
                    .iter()
                    .enumerate()
                    .map(|(k, &y)| y * (PI * j as f64 * (k as f64 + 0.5) / n as f64).cos())
                    .sum();
                let c = 2.0 * s / n as f64;
                if j == 0 {
                    0.5 * c
                } else {
                    c
                }
            })
            .collect();
        Chebyshev { a, b, coeffs }
    }

    pub fn fit(a: f64, b: f64, count: usize, f: impl Fn(f64) -> f64) -> Chebyshev {
        let samples: Vec<f64> = Chebyshev::points(a, b, count).into_iter().map(f).collect();
        Chebyshev::from_samples(a, b, &samples)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let t = (2.0 * x - self.a - self.b) / (self.b - self.a);
        let mut b1 = 0.0;
        let mut b2 = 0.0;
        for &c in self.coeffs.iter().skip(1).rev() {
            let b0 = 2.0 * t * b1 - b2 + c;
            b2 = b1;
            b1 = b0;
        }
        t * b1 - b2 + self.coeffs[0]
    }
}
