//! Forward-mode jets: first order ([`Jet1`]) and second order ([`Jet2`]).
//!
//! Map components are written once against [`Scalar`] and evaluated over
//! `f64`, `Jet1` or `Jet2`. Jets use fixed-capacity storage of
//! [`MAX_DIM`] partials; slots past the active dimension are always zero, so
//! jets of different active dimension combine as if padded. Constants carry
//! dimension zero.
//!
//! The Hessian of a `Jet2` is stored as one packed lower triangle, which
//! makes `hess(i, j) == hess(j, i)` hold bit for bit.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::geometry::SmoothMap;
use crate::smallmat::{SquareMatrix, MAX_DIM};

const TRI: usize = MAX_DIM * (MAX_DIM + 1) / 2;

#[inline]
const fn tri(i: usize, j: usize) -> usize {
    if i >= j {
        i * (i + 1) / 2 + j
    } else {
        j * (j + 1) / 2 + i
    }
}

/// Scalar arithmetic shared by plain reals and jets.
pub trait Scalar:
    Copy
    + Debug
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
{
    fn constant(c: f64) -> Self;
    fn value(&self) -> f64;
    fn exp(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn powi(self, k: i32) -> Self;
    /// Division that rejects a zero denominator value.
    fn try_div(self, rhs: Self) -> Result<Self>;
    /// Square root that rejects negative values (and zero, for jets).
    fn try_sqrt(self) -> Result<Self>;

    fn zero() -> Self {
        Self::constant(0.0)
    }
}

impl Scalar for f64 {
    fn constant(c: f64) -> Self {
        c
    }
    fn value(&self) -> f64 {
        *self
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn powi(self, k: i32) -> Self {
        f64::powi(self, k)
    }
    fn try_div(self, rhs: Self) -> Result<Self> {
        if rhs == 0.0 {
            return Err(Error::Evaluation { op: "div", value: rhs });
        }
        Ok(self / rhs)
    }
    fn try_sqrt(self) -> Result<Self> {
        if self < 0.0 {
            return Err(Error::Evaluation { op: "sqrt", value: self });
        }
        Ok(self.sqrt())
    }
}

/// First-order jet: value and gradient.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet1 {
    value: f64,
    grad: [f64; MAX_DIM],
    dim: usize,
}

impl Jet1 {
    pub fn constant(value: f64) -> Self {
        Self { value, grad: [0.0; MAX_DIM], dim: 0 }
    }

    /// The `index`-th coordinate of a `dim`-dimensional point.
    pub fn variable(value: f64, index: usize, dim: usize) -> Self {
        assert!(index < dim && dim <= MAX_DIM, "jet variable {index} out of range for dim {dim}");
        let mut grad = [0.0; MAX_DIM];
        grad[index] = 1.0;
        Self { value, grad, dim }
    }

    pub fn seed(x: &[f64]) -> Vec<Self> {
        x.iter().enumerate().map(|(i, &v)| Self::variable(v, i, x.len())).collect()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Gradient over the active dimension.
    pub fn grad(&self) -> &[f64] {
        &self.grad[..self.dim]
    }

    /// Partial derivative `index`, zero past the active dimension.
    pub fn partial(&self, index: usize) -> f64 {
        self.grad[index]
    }

    #[inline]
    fn chain(self, f0: f64, f1: f64) -> Self {
        let mut out = Self { value: f0, grad: [0.0; MAX_DIM], dim: self.dim };
        for i in 0..self.dim {
            out.grad[i] = f1 * self.grad[i];
        }
        out
    }
}

/// Second-order jet: value, gradient and symmetric Hessian.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet2 {
    value: f64,
    grad: [f64; MAX_DIM],
    hess: [f64; TRI],
    dim: usize,
}

impl Jet2 {
    pub fn constant(value: f64) -> Self {
        Self { value, grad: [0.0; MAX_DIM], hess: [0.0; TRI], dim: 0 }
    }

    pub fn variable(value: f64, index: usize, dim: usize) -> Self {
        assert!(index < dim && dim <= MAX_DIM, "jet variable {index} out of range for dim {dim}");
        let mut grad = [0.0; MAX_DIM];
        grad[index] = 1.0;
        Self { value, grad, hess: [0.0; TRI], dim }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn grad(&self) -> &[f64] {
        &self.grad[..self.dim]
    }

    pub fn partial(&self, index: usize) -> f64 {
        self.grad[index]
    }

    #[inline]
    pub fn hess(&self, i: usize, j: usize) -> f64 {
        self.hess[tri(i, j)]
    }

    /// Dense Hessian over the active dimension.
    pub fn hessian(&self) -> Vec<Vec<f64>> {
        (0..self.dim).map(|i| (0..self.dim).map(|j| self.hess(i, j)).collect()).collect()
    }

    #[inline]
    fn chain(self, f0: f64, f1: f64, f2: f64) -> Self {
        let mut out = Self { value: f0, grad: [0.0; MAX_DIM], hess: [0.0; TRI], dim: self.dim };
        for i in 0..self.dim {
            out.grad[i] = f1 * self.grad[i];
            for j in 0..=i {
                let k = tri(i, j);
                out.hess[k] = f1 * self.hess[k] + f2 * self.grad[i] * self.grad[j];
            }
        }
        out
    }
}

/// Seeds a point: coordinate `i` gets gradient `e_i` and zero Hessian.
pub fn seed_point(x: &[f64]) -> Vec<Jet2> {
    x.iter().enumerate().map(|(i, &v)| Jet2::variable(v, i, x.len())).collect()
}

macro_rules! scalar_rhs_ops {
    ($t:ty) => {
        impl Add<f64> for $t {
            type Output = $t;
            fn add(mut self, rhs: f64) -> $t {
                self.value += rhs;
                self
            }
        }
        impl Sub<f64> for $t {
            type Output = $t;
            fn sub(mut self, rhs: f64) -> $t {
                self.value -= rhs;
                self
            }
        }
        impl Neg for $t {
            type Output = $t;
            fn neg(self) -> $t {
                self * -1.0
            }
        }
    };
}

scalar_rhs_ops!(Jet1);
scalar_rhs_ops!(Jet2);

impl Mul<f64> for Jet1 {
    type Output = Jet1;
    fn mul(mut self, rhs: f64) -> Jet1 {
        self.value *= rhs;
        for g in &mut self.grad[..self.dim] {
            *g *= rhs;
        }
        self
    }
}

impl Mul<f64> for Jet2 {
    type Output = Jet2;
    fn mul(mut self, rhs: f64) -> Jet2 {
        self.value *= rhs;
        let dim = self.dim;
        for g in &mut self.grad[..dim] {
            *g *= rhs;
        }
        for h in &mut self.hess[..dim * (dim + 1) / 2] {
            *h *= rhs;
        }
        self
    }
}

impl Add for Jet1 {
    type Output = Jet1;
    fn add(self, rhs: Jet1) -> Jet1 {
        let dim = self.dim.max(rhs.dim);
        let mut out = Jet1 { value: self.value + rhs.value, grad: [0.0; MAX_DIM], dim };
        for i in 0..dim {
            out.grad[i] = self.grad[i] + rhs.grad[i];
        }
        out
    }
}

impl Sub for Jet1 {
    type Output = Jet1;
    fn sub(self, rhs: Jet1) -> Jet1 {
        let dim = self.dim.max(rhs.dim);
        let mut out = Jet1 { value: self.value - rhs.value, grad: [0.0; MAX_DIM], dim };
        for i in 0..dim {
            out.grad[i] = self.grad[i] - rhs.grad[i];
        }
        out
    }
}

impl Mul for Jet1 {
    type Output = Jet1;
    fn mul(self, rhs: Jet1) -> Jet1 {
        let dim = self.dim.max(rhs.dim);
        let mut out = Jet1 { value: self.value * rhs.value, grad: [0.0; MAX_DIM], dim };
        for i in 0..dim {
            out.grad[i] = self.grad[i] * rhs.value + self.value * rhs.grad[i];
        }
        out
    }
}

impl Div for Jet1 {
    type Output = Jet1;
    fn div(self, rhs: Jet1) -> Jet1 {
        let dim = self.dim.max(rhs.dim);
        let q = self.value / rhs.value;
        let mut out = Jet1 { value: q, grad: [0.0; MAX_DIM], dim };
        for i in 0..dim {
            out.grad[i] = (self.grad[i] - q * rhs.grad[i]) / rhs.value;
        }
        out
    }
}

impl Add for Jet2 {
    type Output = Jet2;
    fn add(self, rhs: Jet2) -> Jet2 {
        let dim = self.dim.max(rhs.dim);
        let mut out = Jet2 { value: self.value + rhs.value, grad: [0.0; MAX_DIM], hess: [0.0; TRI], dim };
        for i in 0..dim {
            out.grad[i] = self.grad[i] + rhs.grad[i];
        }
        for k in 0..dim * (dim + 1) / 2 {
            out.hess[k] = self.hess[k] + rhs.hess[k];
        }
        out
    }
}

impl Sub for Jet2 {
    type Output = Jet2;
    fn sub(self, rhs: Jet2) -> Jet2 {
        let dim = self.dim.max(rhs.dim);
        let mut out = Jet2 { value: self.value - rhs.value, grad: [0.0; MAX_DIM], hess: [0.0; TRI], dim };
        for i in 0..dim {
            out.grad[i] = self.grad[i] - rhs.grad[i];
        }
        for k in 0..dim * (dim + 1) / 2 {
            out.hess[k] = self.hess[k] - rhs.hess[k];
        }
        out
    }
}

impl Mul for Jet2 {
    type Output = Jet2;
    fn mul(self, rhs: Jet2) -> Jet2 {
        let dim = self.dim.max(rhs.dim);
        let (a, b) = (self.value, rhs.value);
        let mut out = Jet2 { value: a * b, grad: [0.0; MAX_DIM], hess: [0.0; TRI], dim };
        for i in 0..dim {
            out.grad[i] = self.grad[i] * b + a * rhs.grad[i];
            for j in 0..=i {
                let k = tri(i, j);
                out.hess[k] =
                    self.hess[k] * b + a * rhs.hess[k] + self.grad[i] * rhs.grad[j] + self.grad[j] * rhs.grad[i];
            }
        }
        out
    }
}

impl Div for Jet2 {
    type Output = Jet2;
    fn div(self, rhs: Jet2) -> Jet2 {
        // q = a / b, with a = q b differentiated twice.
        let dim = self.dim.max(rhs.dim);
        let b = rhs.value;
        let q = self.value / b;
        let mut out = Jet2 { value: q, grad: [0.0; MAX_DIM], hess: [0.0; TRI], dim };
        for i in 0..dim {
            out.grad[i] = (self.grad[i] - q * rhs.grad[i]) / b;
        }
        for i in 0..dim {
            for j in 0..=i {
                let k = tri(i, j);
                out.hess[k] =
                    (self.hess[k] - q * rhs.hess[k] - out.grad[i] * rhs.grad[j] - rhs.grad[i] * out.grad[j]) / b;
            }
        }
        out
    }
}

impl Scalar for Jet1 {
    fn constant(c: f64) -> Self {
        Jet1::constant(c)
    }
    fn value(&self) -> f64 {
        self.value
    }
    fn exp(self) -> Self {
        let e = self.value.exp();
        self.chain(e, e)
    }
    fn sin(self) -> Self {
        self.chain(self.value.sin(), self.value.cos())
    }
    fn cos(self) -> Self {
        self.chain(self.value.cos(), -self.value.sin())
    }
    fn powi(self, k: i32) -> Self {
        match k {
            0 => Jet1::constant(1.0),
            1 => self,
            _ => self.chain(self.value.powi(k), k as f64 * self.value.powi(k - 1)),
        }
    }
    fn try_div(self, rhs: Self) -> Result<Self> {
        if rhs.value == 0.0 {
            return Err(Error::Evaluation { op: "div", value: rhs.value });
        }
        Ok(self / rhs)
    }
    fn try_sqrt(self) -> Result<Self> {
        if self.value <= 0.0 {
            return Err(Error::Evaluation { op: "sqrt", value: self.value });
        }
        let s = self.value.sqrt();
        Ok(self.chain(s, 0.5 / s))
    }
}

impl Scalar for Jet2 {
    fn constant(c: f64) -> Self {
        Jet2::constant(c)
    }
    fn value(&self) -> f64 {
        self.value
    }
    fn exp(self) -> Self {
        let e = self.value.exp();
        self.chain(e, e, e)
    }
    fn sin(self) -> Self {
        let (s, c) = (self.value.sin(), self.value.cos());
        self.chain(s, c, -s)
    }
    fn cos(self) -> Self {
        let (s, c) = (self.value.sin(), self.value.cos());
        self.chain(c, -s, -c)
    }
    fn powi(self, k: i32) -> Self {
        match k {
            0 => Jet2::constant(1.0),
            1 => self,
            _ => {
                let kf = k as f64;
                self.chain(self.value.powi(k), kf * self.value.powi(k - 1), kf * (kf - 1.0) * self.value.powi(k - 2))
            }
        }
    }
    fn try_div(self, rhs: Self) -> Result<Self> {
        if rhs.value == 0.0 {
            return Err(Error::Evaluation { op: "div", value: rhs.value });
        }
        Ok(self / rhs)
    }
    fn try_sqrt(self) -> Result<Self> {
        if self.value <= 0.0 {
            return Err(Error::Evaluation { op: "sqrt", value: self.value });
        }
        let s = self.value.sqrt();
        Ok(self.chain(s, 0.5 / s, -0.25 / (s * self.value)))
    }
}

/// Jacobian of an `n → n` map at `x`; row `i` is the gradient of component `i`.
pub fn jacobian(f: &SmoothMap, x: &[f64]) -> Result<SquareMatrix> {
    let n = x.len();
    if f.dim_in() != n || f.dim_out() != n {
        return Err(Error::Argument(format!(
            "jacobian needs an {n} -> {n} map, `{}` is {} -> {}",
            f.name(),
            f.dim_in(),
            f.dim_out()
        )));
    }
    let out = f.eval(&Jet1::seed(x))?;
    let mut data = Vec::with_capacity(n * n);
    for c in &out {
        data.extend((0..n).map(|j| c.partial(j)));
    }
    SquareMatrix::new(n, data)
}

/// Evaluates every component of `f` at `x` with second-order jets.
pub fn second_order(f: &SmoothMap, x: &[f64]) -> Result<Vec<Jet2>> {
    f.eval_jet2(&seed_point(x))
}
