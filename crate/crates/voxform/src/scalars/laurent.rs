//! Truncated formal Laurent series in one variable.

use std::collections::BTreeMap;

use super::exact::ExactScalar;
use crate::error::{Result, VoxError};

/// `Σ_{lo ≤ e ≤ order} c_e var^e`; coefficients above `order` are unknown.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedLaurent {
    var: String,
    lo: i64,
    coeffs: BTreeMap<i64, ExactScalar>,
    order: i64,
}

impl TruncatedLaurent {
    /// Builds a series, dropping zero coefficients and anything outside `[lo, order]`.
    pub fn new(
        var: &str,
        lo: i64,
        order: i64,
        coeffs: impl IntoIterator<Item = (i64, ExactScalar)>,
    ) -> Self {
        let mut map = BTreeMap::new();
        for (e, c) in coeffs {
            if e < lo || e > order || c.is_zero() {
                continue;
            }
            let slot = map.entry(e).or_insert_with(ExactScalar::zero);
            *slot += &c;
        }
        map.retain(|_, c: &mut ExactScalar| !c.is_zero());
        TruncatedLaurent { var: var.to_string(), lo, coeffs: map, order }
    }

    /// Power series `Σ_{k=0}^{len-1} c_k var^k` known through `order = len - 1`.
    pub fn from_power_series(var: &str, coeffs: &[ExactScalar]) -> Self {
        let order = coeffs.len() as i64 - 1;
        Self::new(var, 0, order, coeffs.iter().cloned().enumerate().map(|(k, c)| (k as i64, c)))
    }

    /// A polynomial is known to every order; `order` caps what we keep.
    pub fn polynomial(var: &str, coeffs: &[ExactScalar], order: i64) -> Self {
        Self::new(var, 0, order, coeffs.iter().cloned().enumerate().map(|(k, c)| (k as i64, c)))
    }

    pub fn var(&self) -> &str {
        &self.var
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn order(&self) -> i64 {
        self.order
    }

    pub fn coeff(&self, e: i64) -> ExactScalar {
        self.coeffs.get(&e).cloned().unwrap_or_else(ExactScalar::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, &ExactScalar)> {
        self.coeffs.iter().map(|(e, c)| (*e, c))
    }

    /// Evaluates the truncated sum at a nonzero point.
    pub fn eval(&self, x: &ExactScalar) -> ExactScalar {
        self.coeffs.iter().map(|(e, c)| c * &x.powi(*e)).sum()
    }
}

/// Product truncated to `min(order_f + lo_g, order_g + lo_f)`.
pub fn laurent_mul(f: &TruncatedLaurent, g: &TruncatedLaurent) -> Result<TruncatedLaurent> {
    if f.var != g.var {
        return Err(VoxError::VariableMismatch(f.var.clone(), g.var.clone()));
    }
    let order = (f.order + g.lo).min(g.order + f.lo);
    let lo = f.lo + g.lo;
    let mut out: BTreeMap<i64, ExactScalar> = BTreeMap::new();
    for (ef, cf) in &f.coeffs {
        for (eg, cg) in &g.coeffs {
            let e = ef + eg;
            if e > order {
                break;
            }
            *out.entry(e).or_insert_with(ExactScalar::zero) += cf * cg;
        }
    }
    Ok(TruncatedLaurent::new(&f.var, lo, order, out))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(v: &[i64]) -> Vec<ExactScalar> {
        v.iter().map(|&k| ExactScalar::from_int(k)).collect()
    }

    #[test]
    fn difference_of_squares() {
        let a = TruncatedLaurent::polynomial("z", &ints(&[1, 1]), 10);
        let b = TruncatedLaurent::polynomial("z", &ints(&[1, -1]), 10);
        let p = laurent_mul(&a, &b).unwrap();
        assert_eq!(p.coeff(0), ExactScalar::one());
        assert_eq!(p.coeff(1), ExactScalar::zero());
        assert_eq!(p.coeff(2), ExactScalar::from_int(-1));
    }

    #[test]
    fn exponent_cancellation() {
        let a = TruncatedLaurent::new("z", -1, 5, [(-1, ExactScalar::one())]);
        let b = TruncatedLaurent::new("z", 1, 5, [(1, ExactScalar::one())]);
        let p = laurent_mul(&a, &b).unwrap();
        assert_eq!(p.terms().count(), 1);
        assert_eq!(p.coeff(0), ExactScalar::one());
    }

    #[test]
    fn geometric_times_one_minus_z() {
        let l = 9;
        let geo = TruncatedLaurent::from_power_series("z", &ints(&vec![1; l + 1]));
        let lin = TruncatedLaurent::polynomial("z", &ints(&[1, -1]), (l + 1) as i64);
        let p = laurent_mul(&geo, &lin).unwrap();
        // order = min(l + 0, l + 1 + 0) = l, so -z^{l+1} falls outside the known range
        assert_eq!(p.order(), l as i64);
        assert_eq!(p.coeff(0), ExactScalar::one());
        for k in 1..=l as i64 {
            assert!(p.coeff(k).is_zero());
        }
    }

    #[test]
    fn variable_mismatch() {
        let a = TruncatedLaurent::polynomial("z", &ints(&[1]), 3);
        let b = TruncatedLaurent::polynomial("w", &ints(&[1]), 3);
        assert!(matches!(laurent_mul(&a, &b), Err(VoxError::VariableMismatch(_, _))));
    }
}
