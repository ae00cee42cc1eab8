//! Pointwise fields built from a map's Jacobian: `det f'`, the first-row
//! cofactor field `A`, and the divergence of `A`.

use crate::error::{Error, Result};
use crate::geometry::SmoothMap;
use crate::jets::{jacobian, second_order, Jet1, Scalar};
use crate::smallmat::{cofactor_matrix_row_major, determinant, determinant_lu, first_row_cofactors, submatrix};

/// Step of the central finite-difference cross-checks.
pub const FD_STEP: f64 = 1e-5;

fn require_square(f: &SmoothMap) -> Result<()> {
    if f.dim_in() != f.dim_out() || f.dim_in() < 2 {
        return Err(Error::Argument(format!(
            "`{}` must be an n -> n map with n >= 2, got {} -> {}",
            f.name(),
            f.dim_in(),
            f.dim_out()
        )));
    }
    Ok(())
}

pub fn jacobian_determinant(f: &SmoothMap, x: &[f64]) -> Result<f64> {
    Ok(determinant(&jacobian(f, x)?))
}

/// `x ↦ det f'(x)`.
pub fn jacobian_determinant_field(f: &SmoothMap) -> Result<impl Fn(&[f64]) -> Result<f64> + Sync + '_> {
    require_square(f)?;
    Ok(move |x: &[f64]| jacobian_determinant(f, x))
}

/// `A(x)`: cofactors of `∂_i f^1` in `det f'(x)`.
pub fn cofactor_row(f: &SmoothMap, x: &[f64]) -> Result<Vec<f64>> {
    Ok(first_row_cofactors(&jacobian(f, x)?))
}

pub fn cofactor_row_field(f: &SmoothMap) -> Result<impl Fn(&[f64]) -> Result<Vec<f64>> + Sync + '_> {
    require_square(f)?;
    Ok(move |x: &[f64]| cofactor_row(f, x))
}

/// Both sides of `∇f^1 · A = det f'`, the determinant taken by LU.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProductRule {
    pub grad_dot_cofactors: f64,
    pub determinant: f64,
    /// `|lhs - rhs|` over `max(Σ_i |∂_i f^1 A_i|, |det|)`; zero when both vanish.
    pub relative_residual: f64,
}

pub fn product_rule_residual(f: &SmoothMap, x: &[f64]) -> Result<ProductRule> {
    require_square(f)?;
    let jac = jacobian(f, x)?;
    let a = first_row_cofactors(&jac);
    let terms = jac.row(0).iter().zip(&a).map(|(g, c)| g * c);
    let (lhs, scale) = terms.fold((0.0, 0.0_f64), |(s, m), t| (s + t, m + t.abs()));
    let det = determinant_lu(&jac);
    let scale = scale.max(det.abs());
    let diff = (lhs - det).abs();
    let relative_residual = if diff == 0.0 { 0.0 } else { diff / scale };
    Ok(ProductRule { grad_dot_cofactors: lhs, determinant: det, relative_residual })
}

/// `div A(x)` from second-order jets.
///
/// `A_i = (-1)^i det M_i` with `M_i` the Jacobian rows `1..n` minus column
/// `i`; `∂_i det M_i = Σ cof(M_i)[r][c] · ∂_i M_i[r][c]` and
/// `∂_i M_i[r][c] = ∂_i ∂_c f^r`.
pub fn piola_divergence_residual(f: &SmoothMap, x: &[f64]) -> Result<f64> {
    require_square(f)?;
    let n = x.len();
    let jets = second_order(f, x)?;
    let jac: Vec<f64> = jets.iter().flat_map(|c| (0..n).map(move |j| c.partial(j))).collect();
    let k = n - 1;
    let mut div = 0.0;
    for i in 0..n {
        let minor = submatrix(n, &jac, 0, i);
        let cof = cofactor_matrix_row_major(k, &minor);
        let cols: Vec<usize> = (0..n).filter(|&c| c != i).collect();
        let mut d_det = 0.0;
        for (rr, comp) in jets[1..].iter().enumerate() {
            for (cc, &c) in cols.iter().enumerate() {
                d_det += cof[rr * k + cc] * comp.hess(c, i);
            }
        }
        if i % 2 == 0 {
            div += d_det;
        } else {
            div -= d_det;
        }
    }
    Ok(div)
}

/// `div A(x)` by central differences of the Jet1 cofactor field.
pub fn piola_divergence_fd(f: &SmoothMap, x: &[f64], step: f64) -> Result<f64> {
    require_square(f)?;
    let mut div = 0.0;
    let mut p = x.to_vec();
    for i in 0..x.len() {
        p[i] = x[i] + step;
        let plus = cofactor_row(f, &p)?[i];
        p[i] = x[i] - step;
        let minus = cofactor_row(f, &p)?[i];
        p[i] = x[i];
        div += (plus - minus) / (2.0 * step);
    }
    Ok(div)
}

/// Evaluates `f` at `x` with first-order jets and returns values and Jacobian rows.
pub(crate) fn value_and_jacobian(f: &SmoothMap, x: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = x.len();
    let out = f.eval(&Jet1::seed(x))?;
    let values = out.iter().map(Scalar::value).collect();
    let jac = out.iter().flat_map(|c| (0..n).map(move |j| c.partial(j))).collect();
    Ok((values, jac))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{bump_field, identity, linear, quadratic_example, random_polynomial, sum, trig};

    #[test]
    fn determinant_field_examples() {
        let id = identity(3).unwrap();
        let f = jacobian_determinant_field(&id).unwrap();
        assert_eq!(f(&[0.1, 0.2, 0.3]).unwrap(), 1.0);
        let q = quadratic_example().unwrap();
        let f = jacobian_determinant_field(&q).unwrap();
        for x in [[0.3, 0.7], [-1.2, 2.0]] {
            assert!((f(&x).unwrap() - 2.0 * x[0] * x[0]).abs() < 1e-15);
        }
        let a = vec![2.0, 1.0, -1.0, 3.0];
        let lin = linear(2, a).unwrap();
        assert_eq!(jacobian_determinant(&lin, &[5.0, -3.0]).unwrap(), 7.0);
    }

    #[test]
    fn quadratic_jacobian_against_finite_differences() {
        let q = quadratic_example().unwrap();
        let x = [0.4, -0.9];
        let j = jacobian(&q, &x).unwrap();
        assert_eq!(j.as_slice(), &[0.8, 0.0, -0.9, 0.4]);
        for c in 0..2 {
            let mut p = x;
            let mut m = x;
            p[c] += FD_STEP;
            m[c] -= FD_STEP;
            let (fp, fm) = (q.eval_f64(&p).unwrap(), q.eval_f64(&m).unwrap());
            for r in 0..2 {
                assert!(((fp[r] - fm[r]) / (2.0 * FD_STEP) - j.get(r, c)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn cofactor_field_examples() {
        let q = quadratic_example().unwrap();
        let x = [0.6, -0.25];
        // A = (∂f²/∂y, −∂f²/∂x) = (x, −y)
        assert_eq!(cofactor_row(&q, &x).unwrap(), vec![0.6, 0.25]);
        let id = identity(3).unwrap();
        assert_eq!(cofactor_row(&id, &[0.5, 0.1, 0.9]).unwrap(), vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn piola_examples() {
        let lin = linear(3, vec![1.0, 2.0, 0.0, -1.0, 0.5, 3.0, 0.2, 0.0, 1.0]).unwrap();
        assert_eq!(piola_divergence_residual(&lin, &[0.3, 0.4, 0.5]).unwrap(), 0.0);
        let q = quadratic_example().unwrap();
        assert_eq!(piola_divergence_residual(&q, &[0.7, 1.9]).unwrap(), 0.0);
    }

    #[test]
    fn piola_on_random_maps_and_fd_cross_check() {
        let maps = [
            random_polynomial(3, 3, 11, 0.5).unwrap(),
            random_polynomial(4, 3, 12, 0.5).unwrap(),
            trig(3, 0.3).unwrap(),
            sum(vec![identity(2).unwrap(), bump_field(vec![0.0, 0.1], 0.7, vec![0.2, -0.1]).unwrap()]).unwrap(),
        ];
        for f in &maps {
            let n = f.dim_in();
            for k in 0..25 {
                let x: Vec<f64> = (0..n).map(|i| ((k * 7 + i * 3) % 11) as f64 / 11.0 - 0.5).collect();
                let jet = piola_divergence_residual(f, &x).unwrap();
                assert!(jet.abs() <= 1e-11, "{}: {jet}", f.name());
                let fd = piola_divergence_fd(f, &x, FD_STEP).unwrap();
                assert!((jet - fd).abs() <= 1e-5, "{}: jet {jet} fd {fd}", f.name());
            }
        }
    }

    #[test]
    fn first_order_only_map_lacks_capability() {
        use crate::geometry::{MapFn, Smoothness};
        struct C1Only;
        impl MapFn for C1Only {
            fn eval_f64(&self, x: &[f64]) -> Result<Vec<f64>> {
                Ok(x.to_vec())
            }
            fn eval_jet1(&self, x: &[Jet1]) -> Result<Vec<Jet1>> {
                Ok(x.to_vec())
            }
        }
        let f = SmoothMap::new("c1", 2, 2, Smoothness::C1, C1Only).unwrap();
        assert!(matches!(piola_divergence_residual(&f, &[0.0, 0.0]), Err(Error::Capability(_))));
        assert_eq!(jacobian_determinant(&f, &[0.0, 0.0]).unwrap(), 1.0);
    }

    #[test]
    fn product_rule_holds() {
        let f = random_polynomial(4, 3, 3, 0.7).unwrap();
        for k in 0..20 {
            let x: Vec<f64> = (0..4).map(|i| ((k + 5 * i) % 9) as f64 / 9.0 - 0.4).collect();
            let r = product_rule_residual(&f, &x).unwrap();
            assert!(r.relative_residual <= 1e-12, "{r:?}");
        }
    }
}
