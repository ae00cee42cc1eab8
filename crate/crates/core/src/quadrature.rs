//! Tensor-product Gauss–Legendre rules on `(0,1)^d`, volume and surface
//! integrals through domain charts, and a seeded Monte Carlo estimator.
//!
//! Parallel evaluation uses fixed-size chunks summed in index order, so
//! results do not depend on the number of worker threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{chart_normal, BoundaryChart, Domain};
use crate::smallmat::MAX_DIM;

pub const MAX_ORDER: usize = 64;
pub const MAX_NODES: u64 = 100_000_000;
const CHUNK: usize = 1024;

/// `order`-point Gauss–Legendre nodes and weights on `(0,1)`.
fn gauss_legendre_1d(order: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; order];
    let mut weights = vec![0.0; order];
    let m = order.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (order as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=order {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = order as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // x_i descending from near 1; store ascending on (0,1).
        nodes[order - 1 - i] = 0.5 * (1.0 + x);
        nodes[i] = 0.5 * (1.0 - x);
        weights[order - 1 - i] = 0.5 * w;
        weights[i] = 0.5 * w;
    }
    if order % 2 == 1 {
        nodes[order / 2] = 0.5;
    }
    (nodes, weights)
}

/// Tensorized Gauss–Legendre rule on `(0,1)^dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    order: usize,
    dim: usize,
    nodes_1d: Vec<f64>,
    weights_1d: Vec<f64>,
}

pub fn gauss_rule(order: usize, dim: usize) -> Result<QuadratureRule> {
    if !(1..=MAX_ORDER).contains(&order) {
        return Err(Error::Argument(format!("quadrature order {order} outside 1..={MAX_ORDER}")));
    }
    if !(1..=MAX_DIM).contains(&dim) {
        return Err(Error::Argument(format!("quadrature dimension {dim} outside 1..={MAX_DIM}")));
    }
    if (order as u64).checked_pow(dim as u32).is_none_or(|c| c > MAX_NODES) {
        return Err(Error::Resource(format!("{order}^{dim} nodes exceeds the budget of {MAX_NODES}")));
    }
    let (nodes_1d, weights_1d) = gauss_legendre_1d(order);
    Ok(QuadratureRule { order, dim, nodes_1d, weights_1d })
}

impl QuadratureRule {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.order.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Node and weight `k` in lexicographic order (last axis fastest).
    pub fn node(&self, mut k: usize, out: &mut [f64]) -> f64 {
        let mut w = 1.0;
        for slot in out.iter_mut().rev() {
            let i = k % self.order;
            *slot = self.nodes_1d[i];
            w *= self.weights_1d[i];
            k /= self.order;
        }
        w
    }

    pub fn iter(&self) -> impl Iterator<Item = (Vec<f64>, f64)> + '_ {
        (0..self.len()).map(move |k| {
            let mut v = vec![0.0; self.dim];
            let w = self.node(k, &mut v);
            (v, w)
        })
    }

    /// `Σ_k w_k f(v_k)` with a deterministic chunked reduction.
    pub fn integrate<F>(&self, f: F) -> Result<f64>
    where
        F: Fn(&[f64]) -> Result<f64> + Sync,
    {
        let total = self.len();
        let chunks = total.div_ceil(CHUNK);
        let partials: Vec<f64> = (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut v = vec![0.0; self.dim];
                let mut acc = 0.0;
                for k in c * CHUNK..((c + 1) * CHUNK).min(total) {
                    let w = self.node(k, &mut v);
                    acc += w * f(&v)?;
                }
                Ok(acc)
            })
            .collect::<Result<_>>()?;
        Ok(partials.iter().sum())
    }
}

fn check_dim(rule: &QuadratureRule, want: usize) -> Result<()> {
    if rule.dim != want {
        return Err(Error::Argument(format!("rule dimension {} but integral needs {want}", rule.dim)));
    }
    Ok(())
}

/// `∫_Ω g dx` through the volume chart: `Σ w g(ψ(v)) |det ψ'(v)|`.
pub fn volume_integral<F>(integrand: F, d: &Domain, rule: &QuadratureRule) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    check_dim(rule, d.dim())?;
    rule.integrate(|v| {
        let (x, det) = d.chart_point(v)?;
        Ok(integrand(&x).map_err(|e| e.at(&x))? * det.abs())
    })
}

/// `∫ g(u) du` over one chart rectangle.
pub fn chart_integral<F>(chart: &BoundaryChart, rule: &QuadratureRule, integrand: F) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    check_dim(rule, chart.ambient_dim() - 1)?;
    let measure = chart.rectangle_measure();
    Ok(measure * rule.integrate(|v| integrand(&chart.to_rectangle(v)))?)
}

/// `Σ_charts ∫ g(η(u), N(u)) du` with `N` the outward unnormalized normal.
///
/// `g(x, N) = h(x)·|N|` integrates `h dσ`, and `g(x, N) = F(x)·N` integrates
/// the outward flux, without ever dividing by `|N|`.
pub fn surface_integral<F>(integrand: F, d: &Domain, rule: &QuadratureRule) -> Result<f64>
where
    F: Fn(&[f64], &[f64]) -> Result<f64> + Sync,
{
    d.require_atlas()?;
    let mut total = 0.0;
    for chart in d.boundary_atlas() {
        total += chart_integral(chart, rule, |u| {
            let x = chart.param_map().eval_f64(u)?;
            let normal = chart_normal(chart, u)?;
            integrand(&x, &normal).map_err(|e| e.at(&x))
        })?;
    }
    Ok(total)
}

/// Seeded Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub samples: usize,
}

pub const MC_MIN_SAMPLES: usize = 1000;

/// Uniform sampling of the reference box pushed through the volume chart.
///
/// Chunk `c` draws from ChaCha8 stream `c` of `seed`, so the estimate is
/// bit-identical for a given seed regardless of scheduling.
pub fn monte_carlo_volume_integral<F>(integrand: F, d: &Domain, samples: usize, seed: u64) -> Result<McEstimate>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    if samples < MC_MIN_SAMPLES {
        return Err(Error::Argument(format!("Monte Carlo needs at least {MC_MIN_SAMPLES} samples")));
    }
    const MC_CHUNK: usize = 16_384;
    let chunks = samples.div_ceil(MC_CHUNK);
    let n = d.dim();
    let partials: Vec<(f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let mut v = vec![0.0; n];
            let (mut s1, mut s2) = (0.0, 0.0);
            for _ in c * MC_CHUNK..((c + 1) * MC_CHUNK).min(samples) {
                for slot in v.iter_mut() {
                    *slot = rng.random::<f64>();
                }
                let (x, det) = d.chart_point(&v)?;
                let y = integrand(&x).map_err(|e| e.at(&x))? * det.abs();
                s1 += y;
                s2 += y * y;
            }
            Ok((s1, s2))
        })
        .collect::<Result<_>>()?;
    let (s1, s2) = partials.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let count = samples as f64;
    let mean = s1 / count;
    let var = ((s2 / count - mean * mean) * count / (count - 1.0)).max(0.0);
    Ok(McEstimate { estimate: mean, std_error: (var / count).sqrt(), samples })
}

/// Default per-axis order: 24 for `n <= 3`, 20 for `n >= 4`; bump integrands
/// get 32 (24 when `n >= 4`).
pub fn default_order(n: usize, has_bump: bool) -> usize {
    match (n <= 3, has_bump) {
        (true, false) => 24,
        (true, true) => 32,
        (false, false) => 20,
        (false, true) => 24,
    }
}
