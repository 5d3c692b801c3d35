//! Exact and high-precision scalars, truncated Laurent series, exact linear
//! algebra and geometric tail bounds.

mod approx;
mod exact;
mod laurent;
pub mod linalg;

pub use approx::{dyadic_decimal, ApproxScalar, Precision, PRECISION_ENV};
pub use exact::{rational_sqrt, ExactScalar};
pub use laurent::{laurent_mul, TruncatedLaurent};

use std::cmp::Ordering;

use crate::error::{Result, VoxError};

/// `M·R^{-L}/(1 - R^{-1})`, an upper bound on `Σ_{l>L} M·R^{-l}`.
pub fn geometric_tail_bound(m: &ApproxScalar, r: &ApproxScalar, l: u32) -> Result<ApproxScalar> {
    let prec = r.precision();
    let one = ApproxScalar::one(prec);
    let rabs = r.abs();
    if rabs.cmp_re(&one) != Ordering::Greater {
        return Err(VoxError::NonContractive(format!("{rabs:?}")));
    }
    let rinv = one.div(&rabs);
    let num = m.abs().mul(&rinv.powi(l as i64));
    Ok(num.div(&one.sub(&rinv)).inflate())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn approx(x: i64) -> ApproxScalar {
        ApproxScalar::from_int(x, Precision(128))
    }

    #[test]
    fn tail_bound_examples() {
        let b = geometric_tail_bound(&approx(1), &approx(2), 0).unwrap();
        assert!((b.to_f64() - 2.0).abs() < 1e-30);
        let z = geometric_tail_bound(&approx(0), &approx(2), 5).unwrap();
        assert_eq!(z.to_f64(), 0.0);
        let b = geometric_tail_bound(&approx(1), &approx(2), 10).unwrap();
        assert!((b.to_f64() - 2.0f64.powi(-10) * 2.0).abs() < 1e-15);
        assert!(matches!(
            geometric_tail_bound(&approx(1), &approx(1), 3),
            Err(VoxError::NonContractive(_))
        ));
    }
}
