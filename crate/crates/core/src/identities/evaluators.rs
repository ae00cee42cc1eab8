//! Three routes to `∫_Ω det f'(x) dx`.
//!
//! * volume: quadrature of `det f'` through the volume chart;
//! * flux: `∫_∂Ω f^1 A · N du` over the boundary atlas, `A` the cofactor row;
//! * form: `Σ s ∫ f^1(η) det[∂(f^j ∘ η)/∂u^k]_{j ≥ 2} du`, the pullback of
//!   `f^1 df^2 ∧ ⋯ ∧ df^n`, differentiated directly in chart parameters.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{chart_normal_raw, BoundaryChart, Domain, SmoothMap};
use crate::jets::{Jet1, Scalar};
use crate::quadrature::{chart_integral, surface_integral, volume_integral, QuadratureRule};
use crate::smallmat::{det_row_major, first_row_cofactors, SquareMatrix};

use super::fields::{jacobian_determinant, value_and_jacobian};

fn check(f: &SmoothMap, d: &Domain) -> Result<()> {
    if f.dim_in() != d.dim() || f.dim_out() != d.dim() {
        return Err(Error::Argument(format!(
            "`{}` is {} -> {}, domain `{}` has dimension {}",
            f.name(),
            f.dim_in(),
            f.dim_out(),
            d.name(),
            d.dim()
        )));
    }
    Ok(())
}

pub fn integral_volume(f: &SmoothMap, d: &Domain, rule: &QuadratureRule) -> Result<f64> {
    check(f, d)?;
    volume_integral(|x| jacobian_determinant(f, x), d, rule)
}

pub fn integral_flux(f: &SmoothMap, d: &Domain, rule: &QuadratureRule) -> Result<f64> {
    check(f, d)?;
    let n = d.dim();
    surface_integral(
        |x, normal| {
            let (values, jac) = value_and_jacobian(f, x)?;
            let a = first_row_cofactors(&SquareMatrix::new(n, jac)?);
            Ok(values[0] * a.iter().zip(normal).map(|(a, m)| a * m).sum::<f64>())
        },
        d,
        rule,
    )
}

/// `f^1(η(u))` and `det (Φ ∘ η)'(u)` with `Φ = (f^2, …, f^n)`.
fn pullback(f: &SmoothMap, chart: &BoundaryChart, u: &[f64]) -> Result<(f64, f64)> {
    let x = chart.param_map().eval(&Jet1::seed(u))?;
    let y = f.eval(&x)?;
    let k = u.len();
    let block: Vec<f64> = y[1..].iter().flat_map(|c| (0..k).map(move |j| c.partial(j))).collect();
    Ok((y[0].value(), det_row_major(k, &block)))
}

pub fn integral_form(f: &SmoothMap, d: &Domain, rule: &QuadratureRule) -> Result<f64> {
    check(f, d)?;
    d.require_atlas()?;
    let mut total = 0.0;
    for chart in d.boundary_atlas() {
        let s = chart.orientation();
        total += s * chart_integral(chart, rule, |u| {
            let (f1, det) = pullback(f, chart, u)?;
            Ok(f1 * det)
        })?;
    }
    Ok(total)
}

/// The three evaluations of one integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegralTriple {
    pub via_volume: f64,
    pub via_flux: f64,
    pub via_form: f64,
}

impl IntegralTriple {
    /// `(|volume - flux|, |volume - form|, |flux - form|)`.
    pub fn spreads(&self) -> (f64, f64, f64) {
        (
            (self.via_volume - self.via_flux).abs(),
            (self.via_volume - self.via_form).abs(),
            (self.via_flux - self.via_form).abs(),
        )
    }

    pub fn max_spread(&self) -> f64 {
        let (a, b, c) = self.spreads();
        a.max(b).max(c)
    }

    pub fn values(&self) -> [f64; 3] {
        [self.via_volume, self.via_flux, self.via_form]
    }

    pub fn is_finite(&self) -> bool {
        self.values().iter().all(|v| v.is_finite())
    }
}

/// Runs all three evaluators; `surface` is used for the two boundary routes.
pub fn integral_triple(
    f: &SmoothMap,
    d: &Domain,
    volume: &QuadratureRule,
    surface: &QuadratureRule,
) -> Result<IntegralTriple> {
    Ok(IntegralTriple {
        via_volume: integral_volume(f, d, volume)?,
        via_flux: integral_flux(f, d, surface)?,
        via_form: integral_form(f, d, surface)?,
    })
}

/// `A(η(u)) · N(u)` against `det (Φ ∘ η)'(u)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CauchyBinetCheck {
    pub lhs: f64,
    pub rhs: f64,
}

impl CauchyBinetCheck {
    pub fn gap(&self) -> f64 {
        (self.lhs - self.rhs).abs()
    }
}

/// Uses the chart's intrinsic (unoriented) normal so both sides carry the
/// same parameter orientation.
pub fn cauchy_binet_check(f: &SmoothMap, chart: &BoundaryChart, u: &[f64]) -> Result<CauchyBinetCheck> {
    let n = chart.ambient_dim();
    if f.dim_in() != n || f.dim_out() != n {
        return Err(Error::Argument("cauchy_binet_check: map and chart dimensions differ".into()));
    }
    let normal = chart_normal_raw(chart, u)?;
    let x = chart.param_map().eval_f64(u)?;
    let (_, jac) = value_and_jacobian(f, &x)?;
    let a = first_row_cofactors(&SquareMatrix::new(n, jac)?);
    let lhs = a.iter().zip(&normal).map(|(a, m)| a * m).sum();
    let (_, rhs) = pullback(f, chart, u)?;
    Ok(CauchyBinetCheck { lhs, rhs })
}
