//! Boundary-dependence checks: the two-map comparison, single-component
//! replacement chains, the `det(I + t f')` coefficient argument, and the
//! no-retraction obstruction.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{
    assemble, boundary_agreement, bump_field, components, constant, identity, linear, midpoint_grid, sphere_valued_map,
    sum, Component, Domain, DomainKind, SmoothMap,
};
use crate::jets::jacobian;
use crate::quadrature::volume_integral;
use crate::smallmat::{determinant, solve, SquareMatrix};

use super::evaluators::{integral_flux, integral_triple, integral_volume, IntegralTriple};
use super::fields::jacobian_determinant;
use super::{Rules, Tolerances};

/// Boundary sample count used by the hypothesis gate.
pub const BOUNDARY_SAMPLES: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    HypothesisViolation,
}

#[derive(Debug, Clone, Serialize)]
pub struct TheoremCheck {
    pub scenario: String,
    pub boundary_gap: f64,
    pub integral_plus: IntegralTriple,
    pub integral_minus: IntegralTriple,
    /// Largest `|I₊ - I₋|` over the three evaluators.
    pub discrepancy: f64,
    pub tolerance: Tolerances,
    pub verdict: Verdict,
}

/// Compares `∫ det f₊'` and `∫ det f₋'` after gating on `f₊ = f₋` on the boundary.
///
/// A failed gate is reported as [`Verdict::HypothesisViolation`]; the
/// integrals are still computed so the report shows what the discrepancy is.
pub fn theorem1_check(
    scenario: &str,
    f_plus: &SmoothMap,
    f_minus: &SmoothMap,
    d: &Domain,
    rules: &Rules,
    tolerance: Tolerances,
) -> Result<TheoremCheck> {
    let boundary_gap = boundary_agreement(f_plus, f_minus, d, BOUNDARY_SAMPLES)?;
    let integral_plus = integral_triple(f_plus, d, &rules.volume, &rules.surface)?;
    let integral_minus = integral_triple(f_minus, d, &rules.volume, &rules.surface)?;
    let discrepancy =
        integral_plus.values().iter().zip(integral_minus.values()).map(|(p, m)| (p - m).abs()).fold(0.0, f64::max);
    let verdict = if boundary_gap > tolerance.boundary {
        Verdict::HypothesisViolation
    } else if discrepancy <= tolerance.integral {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(TheoremCheck {
        scenario: scenario.to_string(),
        boundary_gap,
        integral_plus,
        integral_minus,
        discrepancy,
        tolerance,
        verdict,
    })
}

/// `I(h^1, …, h^n) = ∫_Ω det h'(x) dx` for components drawn from any maps.
pub fn kulpa_mixed_integral(parts: &[Component], d: &Domain, rules: &Rules) -> Result<f64> {
    if parts.len() != d.dim() {
        return Err(Error::Argument(format!("need {} components, got {}", d.dim(), parts.len())));
    }
    integral_volume(&assemble(parts.to_vec())?, d, &rules.volume)
}

/// One component replacement `h^k → g`.
#[derive(Debug, Clone, Serialize)]
pub struct KulpaStep {
    pub position: usize,
    pub before: f64,
    pub after: f64,
    /// Flux route with component `k` moved to the front (sign corrected).
    pub flux_before: f64,
    pub flux_after: f64,
    /// `max |h^k - g|` on the boundary.
    pub boundary_gap: f64,
}

impl KulpaStep {
    pub fn discrepancy(&self) -> f64 {
        (self.before - self.after).abs()
    }

    pub fn flux_discrepancy(&self) -> f64 {
        (self.flux_before - self.flux_after).abs()
    }
}

/// Swaps component `k` into the first slot; the determinant changes sign when `k != 0`.
fn lead_with(parts: &[Component], k: usize) -> (Vec<Component>, f64) {
    let mut out = parts.to_vec();
    out.swap(0, k);
    (out, if k == 0 { 1.0 } else { -1.0 })
}

pub fn kulpa_step(
    current: &[Component],
    replacement: Component,
    position: usize,
    d: &Domain,
    rules: &Rules,
) -> Result<KulpaStep> {
    if position >= current.len() {
        return Err(Error::Argument(format!("replacement position {position} out of range")));
    }
    let mut next = current.to_vec();
    next[position] = replacement;
    let before = kulpa_mixed_integral(current, d, rules)?;
    let after = kulpa_mixed_integral(&next, d, rules)?;
    let (lead_before, sign) = lead_with(current, position);
    let (lead_after, _) = lead_with(&next, position);
    let flux_before = sign * integral_flux(&assemble(lead_before)?, d, &rules.surface)?;
    let flux_after = sign * integral_flux(&assemble(lead_after)?, d, &rules.surface)?;
    let old = assemble(vec![current[position].clone()])?;
    let new = assemble(vec![next[position].clone()])?;
    let boundary_gap = boundary_agreement(&old, &new, d, BOUNDARY_SAMPLES)?;
    Ok(KulpaStep { position, before, after, flux_before, flux_after, boundary_gap })
}

/// `f₊ → f₋` one component at a time.
#[derive(Debug, Clone, Serialize)]
pub struct KulpaChain {
    pub steps: Vec<KulpaStep>,
}

impl KulpaChain {
    /// `I(f₊) - I(f₋)` as telescoped through the chain.
    pub fn total_change(&self) -> f64 {
        match (self.steps.first(), self.steps.last()) {
            (Some(a), Some(b)) => a.before - b.after,
            _ => 0.0,
        }
    }

    pub fn summed_step_discrepancy(&self) -> f64 {
        self.steps.iter().map(KulpaStep::discrepancy).sum()
    }

    pub fn max_step_discrepancy(&self) -> f64 {
        self.steps.iter().map(KulpaStep::discrepancy).fold(0.0, f64::max)
    }
}

pub fn kulpa_telescope(f_plus: &SmoothMap, f_minus: &SmoothMap, d: &Domain, rules: &Rules) -> Result<KulpaChain> {
    let mut current = components(f_plus);
    let target = components(f_minus);
    if current.len() != d.dim() || target.len() != d.dim() {
        return Err(Error::Argument("kulpa_telescope: maps must be n -> n on the domain".into()));
    }
    let mut steps = Vec::with_capacity(d.dim());
    for (k, replacement) in target.into_iter().enumerate() {
        let step = kulpa_step(&current, replacement.clone(), k, d, rules)?;
        current[k] = replacement;
        steps.push(step);
    }
    Ok(KulpaChain { steps })
}

/// `P(t) = ∫_Ω det(I + t f'(x)) dx` sampled and interpolated.
#[derive(Debug, Clone, Serialize)]
pub struct KrylovPolynomial {
    pub t_values: Vec<f64>,
    pub samples: Vec<f64>,
    /// Coefficients of `t^0, …, t^n`.
    pub coefficients: Vec<f64>,
}

impl KrylovPolynomial {
    pub fn leading(&self) -> f64 {
        *self.coefficients.last().expect("at least one coefficient")
    }
}

/// Interpolation nodes `t_j = j / (n + 1)`, `j = 1..=n+1`.
pub fn krylov_t_values(n: usize) -> Vec<f64> {
    (1..=n + 1).map(|j| j as f64 / (n + 1) as f64).collect()
}

pub fn krylov_polynomial(f: &SmoothMap, d: &Domain, rules: &Rules) -> Result<KrylovPolynomial> {
    let n = d.dim();
    let t_values = krylov_t_values(n);
    let samples = t_values
        .iter()
        .map(|&t| {
            volume_integral(
                |x| {
                    let jac = jacobian(f, x)?;
                    let mut m = jac.as_slice().iter().map(|v| t * v).collect::<Vec<_>>();
                    for i in 0..n {
                        m[i * n + i] += 1.0;
                    }
                    Ok(determinant(&SquareMatrix::new(n, m)?))
                },
                d,
                &rules.volume,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let m = n + 1;
    let vandermonde: Vec<f64> = t_values.iter().flat_map(|&t| (0..m).map(move |p| t.powi(p as i32))).collect();
    let coefficients = solve(m, &vandermonde, &samples)?;
    Ok(KrylovPolynomial { t_values, samples, coefficients })
}

#[derive(Debug, Clone, Serialize)]
pub struct KrylovCheck {
    pub plus: KrylovPolynomial,
    pub minus: KrylovPolynomial,
    pub volume_plus: f64,
    pub volume_minus: f64,
}

impl KrylovCheck {
    /// Largest of `|c₊ - c₋|`, `|c₊ - I₊|`, `|c₋ - I₋|` for the leading coefficients.
    pub fn discrepancy(&self) -> f64 {
        let (cp, cm) = (self.plus.leading(), self.minus.leading());
        (cp - cm).abs().max((cp - self.volume_plus).abs()).max((cm - self.volume_minus).abs())
    }
}

pub fn krylov_leading_coefficient_check(
    f_plus: &SmoothMap,
    f_minus: &SmoothMap,
    d: &Domain,
    rules: &Rules,
) -> Result<KrylovCheck> {
    Ok(KrylovCheck {
        plus: krylov_polynomial(f_plus, d, rules)?,
        minus: krylov_polynomial(f_minus, d, rules)?,
        volume_plus: integral_volume(f_plus, d, &rules.volume)?,
        volume_minus: integral_volume(f_minus, d, &rules.volume)?,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SphereFinding {
    pub map: String,
    pub samples: usize,
    pub max_abs_det: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundaryIdentityFinding {
    pub map: String,
    pub boundary_gap: f64,
    pub triple: IntegralTriple,
    /// Largest deviation of the three evaluators from `Vol(B)`.
    pub max_error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct NoRetractionReport {
    pub dim: usize,
    pub volume: f64,
    pub det_tolerance: f64,
    pub integral_tolerance: f64,
    pub obstruction: Vec<SphereFinding>,
    pub boundary_identity: Vec<BoundaryIdentityFinding>,
    pub obstruction_holds: bool,
    pub volume_identity_holds: bool,
    pub statement: String,
}

impl NoRetractionReport {
    pub fn holds(&self) -> bool {
        self.obstruction_holds && self.volume_identity_holds
    }
}

pub const SPHERE_DET_TOL: f64 = 1e-10;
pub const NO_RETRACTION_SAMPLES: usize = 10_000;

/// Tolerance for the boundary-identity integrals: `1e-8` in the plane, `1e-7` above.
pub fn no_retraction_integral_tolerance(n: usize) -> f64 {
    if n == 2 {
        1e-8
    } else {
        1e-7
    }
}

fn sphere_family(n: usize, d: &Domain) -> Result<Vec<SmoothMap>> {
    let e = |k: usize, s: f64| -> Vec<f64> { (0..n).map(|i| if i == k { s } else { 0.0 }).collect() };
    let mut cyclic = vec![0.0; n * n];
    for i in 0..n {
        cyclic[i * n + (i + 1) % n] = 1.2;
    }
    let gs = vec![
        constant(e(0, 1.0))?,
        sum(vec![identity(n)?, constant(e(0, 2.0))?])?.renamed("x + 2e1"),
        sum(vec![identity(n)?, constant(e(n - 1, 1.5))?])?.renamed("x + 1.5en"),
        sum(vec![linear(n, cyclic)?, constant(e(0, 3.0))?])?.renamed("1.2 Cx + 3e1"),
    ];
    gs.iter().map(|g| sphere_valued_map(g, d)).collect()
}

/// Bumps are centered at the origin, where the polar chart resolves them.
fn boundary_identity_family(n: usize) -> Result<Vec<SmoothMap>> {
    let amp: Vec<f64> = (0..n).map(|i| 0.05 * (1.0 + i as f64)).collect();
    let amp2: Vec<f64> = (0..n).map(|i| if i % 2 == 0 { -0.04 } else { 0.03 }).collect();
    Ok(vec![
        identity(n)?,
        sum(vec![identity(n)?, bump_field(vec![0.0; n], 0.7, amp)?])?.renamed("identity + bump(r 0.7)"),
        sum(vec![identity(n)?, bump_field(vec![0.0; n], 0.5, amp2)?])?.renamed("identity + bump(r 0.5)"),
    ])
}

/// The two halves of the no-retraction contradiction on a ball.
///
/// Sphere-valued maps have `det f' ≡ 0`, while every map equal to the
/// identity on the sphere integrates `det f'` to `Vol(B) > 0`. A smooth
/// retraction would have to be both.
pub fn no_retraction_demo(d: &Domain, rules: &Rules) -> Result<NoRetractionReport> {
    if d.kind() != DomainKind::Ball {
        return Err(Error::Argument(format!("no-retraction demo needs a unit ball, got `{}`", d.name())));
    }
    d.require_atlas()?;
    let n = d.dim();
    let volume = d.reference_volume().expect("balls carry their volume");
    let per_axis = (NO_RETRACTION_SAMPLES as f64).powf(1.0 / n as f64).ceil() as usize;
    let grid: Vec<Vec<f64>> =
        midpoint_grid(per_axis, n).map(|v| d.volume_chart().eval_f64(&v)).collect::<Result<_>>()?;

    let mut obstruction = Vec::new();
    for f in sphere_family(n, d)? {
        let mut max_abs_det = 0.0_f64;
        for x in &grid {
            max_abs_det = max_abs_det.max(jacobian_determinant(&f, x)?.abs());
        }
        obstruction.push(SphereFinding { map: f.name().to_string(), samples: grid.len(), max_abs_det });
    }

    let integral_tolerance = no_retraction_integral_tolerance(n);
    let id = identity(n)?;
    let mut boundary_identity = Vec::new();
    for f in boundary_identity_family(n)? {
        let boundary_gap = boundary_agreement(&f, &id, d, BOUNDARY_SAMPLES)?;
        let triple = integral_triple(&f, d, &rules.volume, &rules.surface)?;
        let max_error = triple.values().iter().map(|v| (v - volume).abs()).fold(0.0, f64::max);
        boundary_identity.push(BoundaryIdentityFinding { map: f.name().to_string(), boundary_gap, triple, max_error });
    }

    let obstruction_holds = obstruction.iter().all(|o| o.max_abs_det <= SPHERE_DET_TOL);
    let volume_identity_holds =
        boundary_identity.iter().all(|b| b.boundary_gap == 0.0 && b.max_error <= integral_tolerance);
    let statement = format!(
        "maps into the sphere have det f' = 0 (max sampled |det| {:.1e}); maps equal to the identity on the \
         sphere integrate det f' to Vol(B) = {volume:.12}; no smooth retraction B -> dB can do both",
        obstruction.iter().map(|o| o.max_abs_det).fold(0.0, f64::max)
    );
    Ok(NoRetractionReport {
        dim: n,
        volume,
        det_tolerance: SPHERE_DET_TOL,
        integral_tolerance,
        obstruction,
        boundary_identity,
        obstruction_holds,
        volume_identity_holds,
        statement,
    })
}
