//! The integral identities as executable checks.

mod checks;
mod evaluators;
mod fields;

pub use checks::{
    krylov_leading_coefficient_check, krylov_polynomial, krylov_t_values, kulpa_mixed_integral, kulpa_step,
    kulpa_telescope, no_retraction_demo, no_retraction_integral_tolerance, theorem1_check, BoundaryIdentityFinding,
    KrylovCheck, KrylovPolynomial, KulpaChain, KulpaStep, NoRetractionReport, SphereFinding, TheoremCheck, Verdict,
    BOUNDARY_SAMPLES, NO_RETRACTION_SAMPLES, SPHERE_DET_TOL,
};
pub use evaluators::{
    cauchy_binet_check, integral_flux, integral_form, integral_triple, integral_volume, CauchyBinetCheck,
    IntegralTriple,
};
pub use fields::{
    cofactor_row, cofactor_row_field, jacobian_determinant, jacobian_determinant_field, piola_divergence_fd,
    piola_divergence_residual, product_rule_residual, ProductRule, FD_STEP,
};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::quadrature::{gauss_rule, QuadratureRule};

/// Pointwise thresholds for the algebraic identities.
pub const PIOLA_TOL: f64 = 1e-11;
pub const PIOLA_FD_TOL: f64 = 1e-5;
pub const PRODUCT_RULE_TOL: f64 = 1e-12;
pub const CAUCHY_BINET_TOL: f64 = 1e-11;
pub const FLUX_FORM_TOL: f64 = 1e-10;

/// Matching volume (`n`-dimensional) and surface (`n-1`) rules of one order.
#[derive(Debug, Clone)]
pub struct Rules {
    pub volume: QuadratureRule,
    pub surface: QuadratureRule,
}

impl Rules {
    pub fn new(n: usize, order: usize) -> Result<Self> {
        Ok(Self { volume: gauss_rule(order, n)?, surface: gauss_rule(order, n - 1)? })
    }

    pub fn order(&self) -> usize {
        self.volume.order()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Integral comparisons.
    pub integral: f64,
    /// Gate on `|f₊ - f₋|` over the boundary.
    pub boundary: f64,
    /// Pointwise algebraic identities.
    pub pointwise: f64,
}

impl Tolerances {
    pub const POLYNOMIAL: Tolerances = Tolerances { integral: 1e-8, boundary: 1e-12, pointwise: 1e-10 };
    pub const BUMP: Tolerances = Tolerances { integral: 1e-6, boundary: 1e-12, pointwise: 1e-10 };
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::POLYNOMIAL
    }
}
