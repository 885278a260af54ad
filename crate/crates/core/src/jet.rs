//! Second-order truncated Taylor jets in up to [`MAX_DIM`] variables.
//!
//! A [`Jet`] carries a value together with its gradient and Hessian with
//! respect to a fixed set of independent variables. Every metric family is
//! written once against this type, so the same code yields metric values,
//! exact first and second chart derivatives, and derivatives along the
//! angles of a coordinate sphere.

use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

/// Largest number of independent variables a jet can carry.
pub const MAX_DIM: usize = 7;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    dim: usize,
    pub value: f64,
    pub grad: [f64; MAX_DIM],
    pub hess: [[f64; MAX_DIM]; MAX_DIM],
}

impl Jet {
    pub fn constant(dim: usize, value: f64) -> Self {
        debug_assert!(dim <= MAX_DIM);
        Jet {
            dim,
            value,
            grad: [0.0; MAX_DIM],
            hess: [[0.0; MAX_DIM]; MAX_DIM],
        }
    }

    /// The independent variable `index` evaluated at `value`.
    pub fn variable(dim: usize, index: usize, value: f64) -> Self {
        let mut jet = Jet::constant(dim, value);
        jet.grad[index] = 1.0;
        jet
    }

    /// Jets for a point, one independent variable per coordinate.
    pub fn point(x: &[f64]) -> Vec<Jet> {
        let dim = x.len();
        x.iter()
            .enumerate()
            .map(|(i, &v)| Jet::variable(dim, i, v))
            .collect()
    }

    /// Plain values carrying no derivative information.
    pub fn constants(x: &[f64]) -> Vec<Jet> {
        x.iter().map(|&v| Jet::constant(0, v)).collect()
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    fn joint_dim(&self, other: &Jet) -> usize {
        self.dim.max(other.dim)
    }

    /// Composition with a univariate function given its value and first two
    /// derivatives at `self.value`.
    #[inline]
    pub fn chain(&self, f0: f64, f1: f64, f2: f64) -> Jet {
        let d = self.dim;
        let mut out = Jet::constant(d, f0);
        for i in 0..d {
            out.grad[i] = f1 * self.grad[i];
        }
        for i in 0..d {
            for j in 0..d {
                out.hess[i][j] = f1 * self.hess[i][j] + f2 * self.grad[i] * self.grad[j];
            }
        }
        out
    }

    pub fn recip(&self) -> Jet {
        let v = self.value;
        self.chain(1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v))
    }

    pub fn sqrt(&self) -> Jet {
        let s = self.value.sqrt();
        self.chain(s, 0.5 / s, -0.25 / (s * self.value))
    }

    pub fn powf(&self, p: f64) -> Jet {
        let v = self.value;
        let f0 = v.powf(p);
        let f1 = p * v.powf(p - 1.0);
        let f2 = p * (p - 1.0) * v.powf(p - 2.0);
        self.chain(f0, f1, f2)
    }

    pub fn powi(&self, k: i32) -> Jet {
        let v = self.value;
        let kf = k as f64;
        let f0 = v.powi(k);
        let f1 = if k == 0 { 0.0 } else { kf * v.powi(k - 1) };
        let f2 = if k == 0 || k == 1 {
            0.0
        } else {
            kf * (kf - 1.0) * v.powi(k - 2)
        };
        self.chain(f0, f1, f2)
    }

    pub fn exp(&self) -> Jet {
        let e = self.value.exp();
        self.chain(e, e, e)
    }

    pub fn ln(&self) -> Jet {
        let v = self.value;
        self.chain(v.ln(), 1.0 / v, -1.0 / (v * v))
    }

    pub fn sin(&self) -> Jet {
        let (s, c) = self.value.sin_cos();
        self.chain(s, c, -s)
    }

    pub fn cos(&self) -> Jet {
        let (s, c) = self.value.sin_cos();
        self.chain(c, -s, -c)
    }

    pub fn scale(&self, c: f64) -> Jet {
        let d = self.dim;
        let mut out = *self;
        out.value *= c;
        for i in 0..d {
            out.grad[i] *= c;
            for j in 0..d {
                out.hess[i][j] *= c;
            }
        }
        out
    }

    /// Fused `self + a * b`, the inner step of every contraction.
    #[inline]
    pub fn add_product(&mut self, a: &Jet, b: &Jet) {
        let d = self.dim.max(a.dim).max(b.dim);
        self.dim = d;
        self.value += a.value * b.value;
        for i in 0..d {
            self.grad[i] += a.grad[i] * b.value + a.value * b.grad[i];
        }
        for i in 0..d {
            for j in 0..d {
                self.hess[i][j] += a.hess[i][j] * b.value
                    + a.value * b.hess[i][j]
                    + a.grad[i] * b.grad[j]
                    + b.grad[i] * a.grad[j];
            }
        }
    }
}

impl Add for Jet {
    type Output = Jet;
    #[inline]
    fn add(self, rhs: Jet) -> Jet {
        let d = self.joint_dim(&rhs);
        let mut out = self;
        out.dim = d;
        out.value += rhs.value;
        for i in 0..d {
            out.grad[i] += rhs.grad[i];
            for j in 0..d {
                out.hess[i][j] += rhs.hess[i][j];
            }
        }
        out
    }
}

impl AddAssign for Jet {
    fn add_assign(&mut self, rhs: Jet) {
        *self = *self + rhs;
    }
}

impl Sub for Jet {
    type Output = Jet;
    #[inline]
    fn sub(self, rhs: Jet) -> Jet {
        self + (-rhs)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Mul for Jet {
    type Output = Jet;
    #[inline]
    fn mul(self, rhs: Jet) -> Jet {
        let mut out = Jet::constant(self.joint_dim(&rhs), 0.0);
        out.add_product(&self, &rhs);
        out
    }
}

impl Div for Jet {
    type Output = Jet;
    fn div(self, rhs: Jet) -> Jet {
        self * rhs.recip()
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(mut self, rhs: f64) -> Jet {
        self.value += rhs;
        self
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;
    fn sub(mut self, rhs: f64) -> Jet {
        self.value -= rhs;
        self
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(rhs)
    }
}

impl Mul<Jet> for f64 {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        rhs.scale(self)
    }
}

impl Add<Jet> for f64 {
    type Output = Jet;
    fn add(self, rhs: Jet) -> Jet {
        rhs + self
    }
}

impl Sub<Jet> for f64 {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        (-rhs) + self
    }
}

/// A scalar function that can be evaluated on jet coordinates.
pub trait ScalarField: Sync {
    fn eval(&self, x: &[Jet]) -> Jet;
}

impl<F: Fn(&[Jet]) -> Jet + Sync> ScalarField for F {
    fn eval(&self, x: &[Jet]) -> Jet {
        self(x)
    }
}

/// Squared Euclidean norm of a point given as jets.
pub fn norm_sq(x: &[Jet]) -> Jet {
    let dim = x.iter().map(Jet::dim).max().unwrap_or(0);
    let mut acc = Jet::constant(dim, 0.0);
    for xi in x {
        acc.add_product(xi, xi);
    }
    acc
}
