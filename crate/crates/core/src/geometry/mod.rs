//! Domains with a volume chart and an oriented boundary atlas, the
//! alternating-minor normal, and the map zoo.

mod maps;

pub use maps::{
    affine, assemble, bump_field, components, constant, identity, linear, quadratic_example, random_polynomial, sum,
    trig, zero, Component, Evaluable, GenericMap, MapFn, SmoothMap, Smoothness,
};

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::jets::{Jet1, Scalar};
use crate::smallmat::{det_row_major, MAX_DIM};

/// Largest dimension with a boundary atlas.
pub const MAX_ATLAS_DIM: usize = 4;

/// An oriented parametrization of a piece of the boundary.
#[derive(Debug, Clone)]
pub struct BoundaryChart {
    param_map: SmoothMap,
    bounds: Vec<(f64, f64)>,
    orientation: f64,
}

impl BoundaryChart {
    /// Builds a chart and fixes its orientation sign so that the normal points
    /// away from `center`, then checks that on a sample grid.
    pub fn new(param_map: SmoothMap, bounds: Vec<(f64, f64)>, center: &[f64]) -> Result<Self> {
        let n = param_map.dim_out();
        if param_map.dim_in() + 1 != n || bounds.len() + 1 != n || center.len() != n {
            return Err(Error::Argument(format!(
                "boundary chart `{}` must map an (n-1)-rectangle into R^n",
                param_map.name()
            )));
        }
        if bounds.iter().any(|(lo, hi)| !(lo < hi)) {
            return Err(Error::Argument("chart rectangle bounds must satisfy lo < hi".into()));
        }
        let mut chart = Self { param_map, bounds, orientation: 1.0 };
        let mid: Vec<f64> = chart.bounds.iter().map(|(lo, hi)| 0.5 * (lo + hi)).collect();
        chart.orientation = if chart.outward_dot(&mid, center)? < 0.0 { -1.0 } else { 1.0 };
        let per_axis = if n <= 3 { 7 } else { 5 };
        for v in midpoint_grid(per_axis, n - 1) {
            let u = chart.to_rectangle(&v);
            if chart.outward_dot(&u, center)? <= 0.0 {
                return Err(Error::Domain(format!(
                    "chart `{}` normal fails the outwardness test at u = {u:?}",
                    chart.param_map.name()
                )));
            }
        }
        Ok(chart)
    }

    fn outward_dot(&self, u: &[f64], center: &[f64]) -> Result<f64> {
        let normal = chart_normal(self, u)?;
        let x = self.param_map.eval_f64(u)?;
        Ok(normal.iter().zip(x.iter().zip(center)).map(|(n, (x, c))| n * (x - c)).sum())
    }

    pub fn param_map(&self) -> &SmoothMap {
        &self.param_map
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    /// `+1` or `-1`; multiplies the intrinsic minor normal to make it outward.
    pub fn orientation(&self) -> f64 {
        self.orientation
    }

    /// Ambient dimension `n`.
    pub fn ambient_dim(&self) -> usize {
        self.param_map.dim_out()
    }

    /// Maps a point of the reference box `(0,1)^{n-1}` into the chart rectangle.
    pub fn to_rectangle(&self, v: &[f64]) -> Vec<f64> {
        v.iter().zip(&self.bounds).map(|(t, (lo, hi))| lo + (hi - lo) * t).collect()
    }

    /// Volume of the chart rectangle.
    pub fn rectangle_measure(&self) -> f64 {
        self.bounds.iter().map(|(lo, hi)| hi - lo).product()
    }

    pub fn contains(&self, u: &[f64]) -> bool {
        u.len() == self.bounds.len() && u.iter().zip(&self.bounds).all(|(x, (lo, hi))| *lo <= *x && *x <= *hi)
    }

    /// Point and tangent matrix: `tangents[i * (n-1) + k] = ∂x^i/∂u^k`.
    pub fn point_and_tangents(&self, u: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let x = self.param_map.eval(&Jet1::seed(u))?;
        let k = u.len();
        let point = x.iter().map(Scalar::value).collect();
        let tangents = x.iter().flat_map(|xi| (0..k).map(move |j| xi.partial(j))).collect();
        Ok((point, tangents))
    }
}

/// Intrinsic normal `(M_1, -M_2, …, (-1)^{n+1} M_n)` where `M_i` is the
/// determinant of the chart Jacobian with row `i` deleted. No orientation.
pub fn chart_normal_raw(chart: &BoundaryChart, u: &[f64]) -> Result<Vec<f64>> {
    if !chart.contains(u) {
        return Err(Error::Argument(format!("u = {u:?} outside the chart rectangle {:?}", chart.bounds)));
    }
    let (_, tangents) = chart.point_and_tangents(u)?;
    let n = chart.ambient_dim();
    Ok(alternating_minors(n, &tangents))
}

pub(crate) fn alternating_minors(n: usize, tall: &[f64]) -> Vec<f64> {
    let k = n - 1;
    let mut sub = Vec::with_capacity(k * k);
    (0..n)
        .map(|i| {
            sub.clear();
            for r in (0..n).filter(|&r| r != i) {
                sub.extend_from_slice(&tall[r * k..(r + 1) * k]);
            }
            let m = det_row_major(k, &sub);
            if i % 2 == 0 {
                m
            } else {
                -m
            }
        })
        .collect()
}

/// Outward, unnormalized normal at `u`; its length is the surface density.
pub fn chart_normal(chart: &BoundaryChart, u: &[f64]) -> Result<Vec<f64>> {
    let raw = chart_normal_raw(chart, u)?;
    if raw.iter().all(|&m| m == 0.0) {
        return Err(Error::DegenerateChart(u.to_vec()));
    }
    Ok(raw.into_iter().map(|m| chart.orientation * m).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainKind {
    Ball,
    Box,
    Ellipse,
    Custom,
}

/// A bounded domain given by a volume chart on `(0,1)^n` and a boundary atlas.
#[derive(Debug, Clone)]
pub struct Domain {
    name: String,
    kind: DomainKind,
    dim: usize,
    volume_chart: SmoothMap,
    boundary_atlas: Vec<BoundaryChart>,
    center: Vec<f64>,
    reference_volume: Option<f64>,
    reference_surface: Option<f64>,
}

impl Domain {
    /// Validates that the volume chart's Jacobian determinant is sign-definite
    /// on a sample grid of the reference box.
    pub fn new(
        name: impl Into<String>,
        volume_chart: SmoothMap,
        boundary_atlas: Vec<BoundaryChart>,
        center: Vec<f64>,
        reference_volume: Option<f64>,
        reference_surface: Option<f64>,
    ) -> Result<Self> {
        let name = name.into();
        let dim = volume_chart.dim_in();
        if !(2..=MAX_DIM).contains(&dim) || volume_chart.dim_out() != dim || center.len() != dim {
            return Err(Error::Argument(format!(
                "domain `{name}` needs an n -> n volume chart with 2 <= n <= {MAX_DIM}"
            )));
        }
        if boundary_atlas.iter().any(|c| c.ambient_dim() != dim) {
            return Err(Error::Argument(format!("domain `{name}` has a boundary chart of the wrong dimension")));
        }
        let domain = Self {
            name,
            kind: DomainKind::Custom,
            dim,
            volume_chart,
            boundary_atlas,
            center,
            reference_volume,
            reference_surface,
        };
        let per_axis = if dim <= 4 { 10 } else { 4 };
        let mut sign = 0.0;
        for v in midpoint_grid(per_axis, dim) {
            let (_, det) = domain.chart_point(&v)?;
            let s = det.signum();
            if det == 0.0 || (sign != 0.0 && s != sign) {
                return Err(Error::Domain(format!(
                    "volume chart of `{}` folds or degenerates near v = {v:?}",
                    domain.name
                )));
            }
            sign = s;
        }
        Ok(domain)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> DomainKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn volume_chart(&self) -> &SmoothMap {
        &self.volume_chart
    }

    pub fn boundary_atlas(&self) -> &[BoundaryChart] {
        &self.boundary_atlas
    }

    pub fn has_atlas(&self) -> bool {
        !self.boundary_atlas.is_empty()
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn reference_volume(&self) -> Option<f64> {
        self.reference_volume
    }

    pub fn reference_surface(&self) -> Option<f64> {
        self.reference_surface
    }

    pub(crate) fn require_atlas(&self) -> Result<()> {
        if self.has_atlas() {
            Ok(())
        } else {
            Err(Error::Capability(format!("domain `{}` has no boundary atlas", self.name)))
        }
    }

    /// Image of a reference point and the chart's Jacobian determinant there.
    pub fn chart_point(&self, v: &[f64]) -> Result<(Vec<f64>, f64)> {
        let x = self.volume_chart.eval(&Jet1::seed(v))?;
        let n = self.dim;
        let jac: Vec<f64> = x.iter().flat_map(|xi| (0..n).map(move |j| xi.partial(j))).collect();
        Ok((x.iter().map(Scalar::value).collect(), det_row_major(n, &jac)))
    }

    /// Unit ball in `R^n` (`2 <= n <= 8`), hyperspherical charts. The
    /// boundary atlas exists for `n <= 4`.
    pub fn unit_ball(n: usize) -> Result<Self> {
        let semi = vec![1.0; n.max(2)];
        let mut d = Self::ellipsoid_like(
            format!("unit_ball_{n}"),
            n,
            semi,
            Some(ball_volume(n)),
            Some(n as f64 * ball_volume(n)),
        )?;
        d.kind = DomainKind::Ball;
        Ok(d)
    }

    /// Axis-aligned ellipse with semi-axes `a`, `b`.
    pub fn ellipse(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0) {
            return Err(Error::Argument("ellipse semi-axes must be positive".into()));
        }
        let mut d = Self::ellipsoid_like(format!("ellipse({a}, {b})"), 2, vec![a, b], Some(PI * a * b), None)?;
        d.kind = DomainKind::Ellipse;
        Ok(d)
    }

    fn ellipsoid_like(
        name: String,
        n: usize,
        semi_axes: Vec<f64>,
        volume: Option<f64>,
        surface: Option<f64>,
    ) -> Result<Self> {
        if !(2..=MAX_DIM).contains(&n) {
            return Err(Error::Argument(format!("ball dimension {n} outside 2..={MAX_DIM}")));
        }
        let center = vec![0.0; n];
        let mut atlas = Vec::new();
        if n <= MAX_ATLAS_DIM {
            let mut bounds = vec![(0.0, PI); n - 1];
            bounds[n - 2] = (0.0, 2.0 * PI);
            let chart = maps::ellipsoid_boundary_chart(semi_axes.clone())?;
            atlas.push(BoundaryChart::new(chart, bounds, &center)?);
        }
        let surface = if n <= MAX_ATLAS_DIM { surface } else { None };
        let volume_chart = maps::ellipsoid_volume_chart(semi_axes)?;
        Self::new(name, volume_chart, atlas, center, volume, surface)
    }

    /// Unit box `[0,1]^n`; `2n` face charts for `n <= 4`.
    pub fn unit_box(n: usize) -> Result<Self> {
        if !(2..=MAX_DIM).contains(&n) {
            return Err(Error::Argument(format!("box dimension {n} outside 2..={MAX_DIM}")));
        }
        let center = vec![0.5; n];
        let mut atlas = Vec::new();
        if n <= MAX_ATLAS_DIM {
            for axis in 0..n {
                for level in [0.0, 1.0] {
                    let face = maps::box_face_chart(n, axis, level)?;
                    atlas.push(BoundaryChart::new(face, vec![(0.0, 1.0); n - 1], &center)?);
                }
            }
        }
        let surface = (n <= MAX_ATLAS_DIM).then_some(2.0 * n as f64);
        let mut d = Self::new(format!("unit_box_{n}"), identity(n)?, atlas, center, Some(1.0), surface)?;
        d.kind = DomainKind::Box;
        Ok(d)
    }
}

/// Volume of the unit ball in `R^n`.
pub fn ball_volume(n: usize) -> f64 {
    match n {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * PI / n as f64 * ball_volume(n - 2),
    }
}

/// Midpoints of a uniform `per_axis^dim` grid of `(0,1)^dim`, lexicographic.
pub fn midpoint_grid(per_axis: usize, dim: usize) -> impl Iterator<Item = Vec<f64>> {
    let total = per_axis.pow(dim as u32);
    (0..total).map(move |mut k| {
        let mut v = vec![0.0; dim];
        for slot in v.iter_mut().rev() {
            *slot = ((k % per_axis) as f64 + 0.5) / per_axis as f64;
            k /= per_axis;
        }
        v
    })
}

/// Closed uniform grid of `[0,1]^dim`, endpoints included.
fn closed_grid(per_axis: usize, dim: usize) -> impl Iterator<Item = Vec<f64>> {
    let total = per_axis.pow(dim as u32);
    (0..total).map(move |mut k| {
        let mut v = vec![0.0; dim];
        for slot in v.iter_mut().rev() {
            *slot = (k % per_axis) as f64 / (per_axis - 1) as f64;
            k /= per_axis;
        }
        v
    })
}

/// Boundary sample points, spread evenly over the atlas charts.
pub fn boundary_samples(d: &Domain, samples: usize) -> Vec<Vec<f64>> {
    let charts = d.boundary_atlas.len();
    if charts == 0 || samples == 0 {
        return Vec::new();
    }
    let k = d.dim - 1;
    let per_chart = samples.div_ceil(charts);
    let per_axis = ((per_chart as f64).powf(1.0 / k as f64).ceil() as usize).max(1);
    let mut out = Vec::new();
    for chart in &d.boundary_atlas {
        for v in midpoint_grid(per_axis, k) {
            if let Ok(x) = chart.param_map.eval_f64(&chart.to_rectangle(&v)) {
                out.push(x);
            }
        }
    }
    out
}

/// Largest `|fa - fb|_∞` over boundary sample points.
pub fn boundary_agreement(fa: &SmoothMap, fb: &SmoothMap, d: &Domain, samples: usize) -> Result<f64> {
    if fa.dim_in() != d.dim || fb.dim_in() != d.dim || fa.dim_out() != fb.dim_out() {
        return Err(Error::Argument("boundary_agreement: dimension mismatch".into()));
    }
    let mut gap = 0.0_f64;
    for x in boundary_samples(d, samples) {
        let a = fa.eval_f64(&x)?;
        let b = fb.eval_f64(&x)?;
        for (p, q) in a.iter().zip(&b) {
            gap = gap.max((p - q).abs());
        }
    }
    Ok(gap)
}

/// Minimum `|g|` below which normalization is refused.
pub const SPHERE_MIN_NORM: f64 = 1e-6;

/// `x ↦ g(x)/|g(x)|`, after checking `|g| > 1e-6` on a grid of the closed domain.
pub fn sphere_valued_map(g: &SmoothMap, d: &Domain) -> Result<SmoothMap> {
    if g.dim_in() != d.dim || g.dim_out() != d.dim {
        return Err(Error::Argument("sphere_valued_map: g must be n -> n on the domain".into()));
    }
    let per_axis = if d.dim <= 4 { 11 } else { 4 };
    let mut probes: Vec<Vec<f64>> = Vec::new();
    for v in closed_grid(per_axis, d.dim) {
        probes.push(d.volume_chart.eval_f64(&v)?);
    }
    probes.extend(boundary_samples(d, 1000));
    for x in probes {
        let norm = g.eval_f64(&x)?.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm <= SPHERE_MIN_NORM {
            return Err(Error::Domain(format!("|{}| = {norm:e} at {x:?}: normalization is singular", g.name())));
        }
    }
    maps::normalized(g.clone())
}
