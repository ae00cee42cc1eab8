//! Smooth maps written once over [`Scalar`], and the library map zoo.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::jets::{Jet1, Jet2, Scalar};
use crate::smallmat::MAX_DIM;

/// Declared smoothness; metadata only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Smoothness {
    C1,
    C2,
    CInf,
}

/// Object-safe evaluation over the three scalar types.
///
/// Implement [`GenericMap`] instead unless the map is deliberately not
/// second-order evaluable.
pub trait MapFn: Send + Sync {
    fn eval_f64(&self, x: &[f64]) -> Result<Vec<f64>>;
    fn eval_jet1(&self, x: &[Jet1]) -> Result<Vec<Jet1>>;
    fn eval_jet2(&self, _x: &[Jet2]) -> Result<Vec<Jet2>> {
        Err(Error::Capability("map is not second-order evaluable".into()))
    }
}

/// A map whose components are written generically over the scalar type.
pub trait GenericMap: Send + Sync {
    fn eval<S: Evaluable>(&self, x: &[S]) -> Result<Vec<S>>;
}

impl<T: GenericMap> MapFn for T {
    fn eval_f64(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.eval(x)
    }
    fn eval_jet1(&self, x: &[Jet1]) -> Result<Vec<Jet1>> {
        self.eval(x)
    }
    fn eval_jet2(&self, x: &[Jet2]) -> Result<Vec<Jet2>> {
        self.eval(x)
    }
}

/// Scalars that know how to route through a [`MapFn`].
pub trait Evaluable: Scalar {
    fn dispatch(map: &dyn MapFn, x: &[Self]) -> Result<Vec<Self>>;
}

impl Evaluable for f64 {
    fn dispatch(map: &dyn MapFn, x: &[Self]) -> Result<Vec<Self>> {
        map.eval_f64(x)
    }
}

impl Evaluable for Jet1 {
    fn dispatch(map: &dyn MapFn, x: &[Self]) -> Result<Vec<Self>> {
        map.eval_jet1(x)
    }
}

impl Evaluable for Jet2 {
    fn dispatch(map: &dyn MapFn, x: &[Self]) -> Result<Vec<Self>> {
        map.eval_jet2(x)
    }
}

/// A named map `R^dim_in → R^dim_out`. Cheap to clone.
#[derive(Clone)]
pub struct SmoothMap {
    name: String,
    dim_in: usize,
    dim_out: usize,
    smoothness: Smoothness,
    inner: Arc<dyn MapFn>,
}

impl fmt::Debug for SmoothMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SmoothMap({}: R^{} -> R^{})", self.name, self.dim_in, self.dim_out)
    }
}

impl SmoothMap {
    pub fn new(
        name: impl Into<String>,
        dim_in: usize,
        dim_out: usize,
        smoothness: Smoothness,
        inner: impl MapFn + 'static,
    ) -> Result<Self> {
        if dim_in == 0 || dim_in > MAX_DIM || dim_out == 0 || dim_out > MAX_DIM {
            return Err(Error::Argument(format!("map dimensions {dim_in} -> {dim_out} outside 1..={MAX_DIM}")));
        }
        Ok(Self { name: name.into(), dim_in, dim_out, smoothness, inner: Arc::new(inner) })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn smoothness(&self) -> Smoothness {
        self.smoothness
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn eval<S: Evaluable>(&self, x: &[S]) -> Result<Vec<S>> {
        if x.len() != self.dim_in {
            return Err(Error::Argument(format!("`{}` expects {} inputs, got {}", self.name, self.dim_in, x.len())));
        }
        let out = S::dispatch(&*self.inner, x)?;
        debug_assert_eq!(out.len(), self.dim_out, "`{}` returned wrong arity", self.name);
        Ok(out)
    }

    pub fn eval_f64(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.eval(x)
    }

    pub fn eval_jet2(&self, x: &[Jet2]) -> Result<Vec<Jet2>> {
        self.eval(x)
    }
}

// ---------------------------------------------------------------------------
// Map zoo

struct Identity;

impl GenericMap for Identity {
    fn eval<S: Evaluable>(&self, x: &[S]) -> Result<Vec<S>> {
        Ok(x.to_vec())
    }
}

pub fn identity(n: usize) -> Result<SmoothMap> {
    SmoothMap::new("identity", n, n, Smoothness::CInf, Identity)
}

struct Affine {
    n: usize,
    matrix: Vec<f64>,
    offset: Vec<f64>,
}

impl GenericMap for Affine {
    fn eval<S: Evaluable>(&self, x: &[S]) -> Result<Vec<S>> {
        Ok((0..self.matrix.len() / self.n)
            .map(|i| {
                let mut acc = S::constant(self.offset[i]);
                for (j, &xj) in x.iter().enumerate() {
                    let a = self.matrix[i * self.n + j];
                    if a != 0.0 {
                        acc = acc + xj * a;
                    }
                }
                acc
            })
            .collect())
    }
}

/// `x ↦ A x` with `A` row-major `n × n`.
pub fn linear(n: usize, matrix: Vec<f64>) -> Result<SmoothMap> {
    affine(n, matrix, vec![0.0; n]).map(|m| m.renamed("linear"))
}

pub fn affine(n: usize, matrix: Vec<f64>, offset: Vec<f64>) -> Result<SmoothMap> {
    if matrix.len() != n * n || offset.len() != n {
        return Err(Error::Argument(format!("affine map in dimension {n} needs {} matrix entries", n * n)));
    }
    SmoothMap::new("affine", n, n, Smoothness::CInf, Affine { n, matrix, offset })
}

/// `x ↦ c`.
pub fn constant(c: Vec<f64>) -> Result<SmoothMap> {
    let n = c.len();
    affine(n, vec![0.0; n * n], c).map(|m| m.renamed("constant"))
}

pub fn zero(n: usize) -> Result<SmoothMap> {
    constant(vec![0.0; n]).map(|m| m.renamed("zero"))
}

struct QuadraticExample;

impl GenericMap for QuadraticExample {
    fn eval<S: Evaluable>(&self, x: &[S]) -> Result<Vec<S>> {
        Ok(vec![x[0] * x[0], x[0] * x[1]])
    }
}

/// `(x, y) ↦ (x², x y)`, Jacobian determinant `2 x²`.
pub fn quadratic_example() -> Result<SmoothMap> {
    SmoothMap::new("quadratic", 2, 2, Smoothness::CInf, QuadraticExample)
}

struct Polynomial {
    n: usize,
    /// Per component: (coefficient, exponent per variable).
    terms: Vec<Vec<(f64, Vec<i32>)>>,
}

impl GenericMap for Polynomial {
    fn eval<S: Evaluable>(&self, x: &[S]) -> Result<Vec<S>> {
        Ok(self
            .terms
            .iter()
            .map(|comp| {
                let mut acc = S::zero();
                for (c, exps) in comp {
                    let mut mono = S::constant(*c);
                    for (v, &e) in exps.iter().enumerate().take(self.n) {
                        if e > 0 {
                            mono = mono * x[v].powi(e);
                        }
                    }
                    acc = acc + mono;
                }
                acc
            })
            .collect())
    }
}

fn exponents(n: usize, degree: i32) -> Vec<Vec<i32>> {
    fn rec(n: usize, left: i32, cur: &mut Vec<i32>, out: &mut Vec<Vec<i32>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for e in 0..=left {
            cur.push(e);
            rec(n, left - e, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, degree, &mut Vec::new(), &mut out);
    out
}

/// Seeded random polynomial map of total degree `degree`: the identity plus
/// every monomial with a coefficient uniform in `[-scale, scale]`.
pub fn random_polynomial(n: usize, degree: u32, seed: u64, scale: f64) -> Result<SmoothMap> {
    if degree == 0 || degree > 6 {
        return Err(Error::Argument(format!("polynomial degree {degree} outside 1..=6")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let monomials = exponents(n, degree as i32);
    let terms = (0..n)
        .map(|i| {
            monomials
                .iter()
                .map(|e| {
                    let mut c = rng.random_range(-scale..=scale);
                    if e.iter().sum::<i32>() == 1 && e[i] == 1 {
                        c += 1.0;
                    }
                    (c, e.clone())
                })
                .collect()
        })
        .collect();
    SmoothMap::new(format!("polynomial(deg {degree}, seed {seed})"), n, n, Smoothness::CInf, Polynomial { n, terms })
}

struct Trig {
    n: usize,
    strength: f64,
}

impl GenericMap for Trig {
    fn eval<S: Evaluable>(&self, x: &[S]) -> Result<Vec<S>> {
        let n = self.n;
        Ok((0..n)
            .map(|i| {
                let next = x[(i + 1) % n];
                let prev = x[(i + n - 1) % n];
                x[i] + (next * 1.3).sin() * (x[i] * 0.4).exp() * self.strength + (prev * 0.7).cos() * self.strength
            })
            .collect())
    }
}

/// A C∞ perturbation of the identity built from `sin`, `cos` and `exp`.
pub fn trig(n: usize, strength: f64) -> Result<SmoothMap> {
    SmoothMap::new("trig", n, n, Smoothness::CInf, Trig { n, strength })
}

struct Bump {
    center: Vec<f64>,
    radius: f64,
    amplitude: Vec<f64>,
}

impl GenericMap for Bump {
    fn eval<S: Evaluable>(&self, x: &[S]) -> Result<Vec<S>> {
        let inv_r2 = 1.0 / (self.radius * self.radius);
        let mut s = S::zero();
        for (xi, ci) in x.iter().zip(&self.center) {
            let d = *xi - *ci;
            s = s + d * d * inv_r2;
        }
        if s.value() >= 1.0 {
            return Ok(vec![S::zero(); self.amplitude.len()]);
        }
        // exp(1 - 1/(1 - s))
        let one = S::constant(1.0);
        let profile = (one - one.try_div(one - s)?).exp();
        Ok(self.amplitude.iter().map(|&a| profile * a).collect())
    }
}

/// Compactly supported C∞ field `amplitude · exp(1 - 1/(1 - |x-c|²/r²))`,
/// zero outside the open ball of the given radius.
pub fn bump_field(center: Vec<f64>, radius: f64, amplitude: Vec<f64>) -> Result<SmoothMap> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::Argument(format!("bump radius must be positive, got {radius}")));
    }
    let n = center.len();
    if amplitude.len() != n {
        return Err(Error::Argument("bump center and amplitude dimensions differ".into()));
    }
    SmoothMap::new("bump", n, n, Smoothness::CInf, Bump { center, radius, amplitude })
}

struct Sum(Vec<SmoothMap>);

impl GenericMap for Sum {
    fn eval<S: Evaluable>(&self, x: &[S]) -> Result<Vec<S>> {
        let mut acc = self.0[0].eval(x)?;
        for term in &self.0[1..] {
            for (a, b) in acc.iter_mut().zip(term.eval(x)?) {
                *a = *a + b;
            }
        }
        Ok(acc)
    }
}

/// Pointwise sum of maps sharing dimensions.
pub fn sum(terms: Vec<SmoothMap>) -> Result<SmoothMap> {
    let first = terms.first().ok_or_else(|| Error::Argument("sum of zero maps".into()))?;
    let (din, dout) = (first.dim_in(), first.dim_out());
    if terms.iter().any(|t| t.dim_in() != din || t.dim_out() != dout) {
        return Err(Error::Argument("sum terms have mismatched dimensions".into()));
    }
    let smoothness = terms.iter().map(SmoothMap::smoothness).min().unwrap_or(Smoothness::CInf);
    let name = terms.iter().map(SmoothMap::name).collect::<Vec<_>>().join(" + ");
    SmoothMap::new(name, din, dout, smoothness, Sum(terms))
}

struct Normalized(SmoothMap);

impl GenericMap for Normalized {
    fn eval<S: Evaluable>(&self, x: &[S]) -> Result<Vec<S>> {
        let g = self.0.eval(x)?;
        let mut norm2 = S::zero();
        for gi in &g {
            norm2 = norm2 + *gi * *gi;
        }
        let norm = norm2.try_sqrt()?;
        g.into_iter().map(|gi| gi.try_div(norm)).collect()
    }
}

/// `x ↦ g(x) / |g(x)|` without the nonvanishing check; see
/// [`super::sphere_valued_map`].
pub(crate) fn normalized(g: SmoothMap) -> Result<SmoothMap> {
    let n = g.dim_in();
    let name = format!("sphere_valued({})", g.name());
    SmoothMap::new(name, n, g.dim_out(), g.smoothness(), Normalized(g))
}

/// One scalar component of a map.
#[derive(Debug, Clone)]
pub struct Component {
    pub map: SmoothMap,
    pub index: usize,
}

impl Component {
    pub fn new(map: &SmoothMap, index: usize) -> Self {
        Self { map: map.clone(), index }
    }
}

struct Assembled(Vec<Component>);

impl GenericMap for Assembled {
    fn eval<S: Evaluable>(&self, x: &[S]) -> Result<Vec<S>> {
        self.0.iter().map(|c| Ok(c.map.eval(x)?[c.index])).collect()
    }
}

/// Builds a map whose `i`-th component is `components[i]`.
pub fn assemble(components: Vec<Component>) -> Result<SmoothMap> {
    let first = components.first().ok_or_else(|| Error::Argument("no components".into()))?;
    let n = first.map.dim_in();
    for c in &components {
        if c.map.dim_in() != n || c.index >= c.map.dim_out() {
            return Err(Error::Argument(format!(
                "component {} of `{}` is not a scalar field on R^{n}",
                c.index,
                c.map.name()
            )));
        }
    }
    let smoothness = components.iter().map(|c| c.map.smoothness()).min().unwrap_or(Smoothness::CInf);
    let name = components.iter().map(|c| format!("{}[{}]", c.map.name(), c.index)).collect::<Vec<_>>().join(", ");
    SmoothMap::new(format!("({name})"), n, components.len(), smoothness, Assembled(components))
}

/// Components of `f` split into [`Component`]s.
pub fn components(f: &SmoothMap) -> Vec<Component> {
    (0..f.dim_out()).map(|i| Component::new(f, i)).collect()
}

// ---------------------------------------------------------------------------
// Charts

/// Hyperspherical coordinates `(r, ψ_1, …, ψ_{n-1}) ↦ x` with
/// `x_1 = r cos ψ_1`, `x_k = r sin ψ_1 ⋯ sin ψ_{k-1} cos ψ_k`,
/// `x_n = r sin ψ_1 ⋯ sin ψ_{n-1}`, scaled per axis by `semi_axes`.
fn hyperspherical<S: Evaluable>(r: S, angles: &[S], semi_axes: &[f64]) -> Vec<S> {
    let n = angles.len() + 1;
    let mut out = Vec::with_capacity(n);
    let mut sines = r;
    for (k, &psi) in angles.iter().enumerate() {
        out.push(sines * psi.cos() * semi_axes[k]);
        sines = sines * psi.sin();
    }
    out.push(sines * semi_axes[n - 1]);
    out
}

fn angle_scales(n: usize) -> Vec<f64> {
    (0..n - 1).map(|k| if k == n - 2 { 2.0 * std::f64::consts::PI } else { std::f64::consts::PI }).collect()
}

struct BallVolume {
    semi_axes: Vec<f64>,
}

impl GenericMap for BallVolume {
    fn eval<S: Evaluable>(&self, v: &[S]) -> Result<Vec<S>> {
        let n = v.len();
        let scales = angle_scales(n);
        let angles: Vec<S> = v[1..].iter().zip(&scales).map(|(&a, &s)| a * s).collect();
        Ok(hyperspherical(v[0], &angles, &self.semi_axes))
    }
}

struct BallBoundary {
    semi_axes: Vec<f64>,
}

impl GenericMap for BallBoundary {
    fn eval<S: Evaluable>(&self, u: &[S]) -> Result<Vec<S>> {
        Ok(hyperspherical(S::constant(1.0), u, &self.semi_axes))
    }
}

/// Volume chart `(0,1)^n → ellipsoid` through scaled hyperspherical coordinates.
pub(crate) fn ellipsoid_volume_chart(semi_axes: Vec<f64>) -> Result<SmoothMap> {
    let n = semi_axes.len();
    SmoothMap::new(format!("hyperspherical_volume_{n}"), n, n, Smoothness::CInf, BallVolume { semi_axes })
}

/// Boundary chart on `[0,π]^{n-2} × [0,2π]`.
pub(crate) fn ellipsoid_boundary_chart(semi_axes: Vec<f64>) -> Result<SmoothMap> {
    let n = semi_axes.len();
    SmoothMap::new(format!("hyperspherical_boundary_{n}"), n - 1, n, Smoothness::CInf, BallBoundary { semi_axes })
}

struct BoxFace {
    axis: usize,
    level: f64,
}

impl GenericMap for BoxFace {
    fn eval<S: Evaluable>(&self, u: &[S]) -> Result<Vec<S>> {
        let mut out = Vec::with_capacity(u.len() + 1);
        out.extend_from_slice(&u[..self.axis]);
        out.push(S::constant(self.level));
        out.extend_from_slice(&u[self.axis..]);
        Ok(out)
    }
}

/// Face `x_axis = level` of a box, parametrized by the remaining coordinates in order.
pub(crate) fn box_face_chart(n: usize, axis: usize, level: f64) -> Result<SmoothMap> {
    SmoothMap::new(format!("face(x{} = {level})", axis + 1), n - 1, n, Smoothness::CInf, BoxFace { axis, level })
}
