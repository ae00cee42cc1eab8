//! Numerical verification of the boundary dependence of `∫_Ω det f'(x) dx`.
//!
//! The crate evaluates the integral three independent ways (volume
//! quadrature, divergence-theorem flux of `f^1 A`, and the pulled-back form
//! `f^1 df^2 ∧ ⋯ ∧ df^n`), checks the pointwise identities behind them (the
//! Piola identity `div A = 0`, `∇f^1 · A = det f'`, Cauchy–Binet on boundary
//! charts), and uses them to compare maps that agree on `∂Ω`.

pub mod cli;
pub mod error;
pub mod geometry;
pub mod identities;
pub mod jets;
pub mod quadrature;
pub mod smallmat;

pub use error::{Error, Result};
pub use geometry::{Domain, SmoothMap};
pub use identities::{IntegralTriple, Rules, Tolerances};
pub use quadrature::QuadratureRule;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
