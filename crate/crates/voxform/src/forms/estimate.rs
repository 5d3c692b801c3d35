//! Exact partial values together with a bound on the omitted tail.

use crate::scalars::{ApproxScalar, ExactScalar, Precision};

/// `value` approximates the true quantity to within `bound` in modulus.
#[derive(Clone, Debug)]
pub struct Estimate {
    pub value: ExactScalar,
    pub bound: ApproxScalar,
}

impl Estimate {
    pub fn exact(value: ExactScalar, prec: Precision) -> Self {
        Estimate { value, bound: ApproxScalar::zero(prec) }
    }

    pub fn zero(prec: Precision) -> Self {
        Estimate::exact(ExactScalar::zero(), prec)
    }

    pub fn is_exact(&self) -> bool {
        self.bound.to_f64() == 0.0
    }

    pub fn add(&self, o: &Estimate) -> Estimate {
        Estimate { value: &self.value + &o.value, bound: self.bound.add(&o.bound) }
    }

    pub fn sub(&self, o: &Estimate) -> Estimate {
        Estimate { value: &self.value - &o.value, bound: self.bound.add(&o.bound) }
    }

    pub fn scale(&self, k: &ExactScalar) -> Estimate {
        let m = ApproxScalar::from_exact(k, self.bound.precision()).abs();
        Estimate { value: &self.value * k, bound: self.bound.mul(&m) }
    }

    pub fn mul(&self, o: &Estimate) -> Estimate {
        let prec = self.bound.precision();
        let a = ApproxScalar::from_exact(&self.value, prec).abs();
        let b = ApproxScalar::from_exact(&o.value, prec).abs();
        let bound = a.mul(&o.bound).add(&b.mul(&self.bound)).add(&self.bound.mul(&o.bound));
        Estimate { value: &self.value * &o.value, bound }
    }

    /// Modulus of the value, as an approximation.
    pub fn modulus(&self) -> ApproxScalar {
        ApproxScalar::from_exact(&self.value, self.bound.precision()).abs()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bound_propagation() {
        let p = Precision(64);
        let x = Estimate { value: ExactScalar::from_int(2), bound: ApproxScalar::from_int(1, p) };
        let y = Estimate { value: ExactScalar::from_int(3), bound: ApproxScalar::from_int(1, p) };
        let z = x.mul(&y);
        assert_eq!(z.value, ExactScalar::from_int(6));
        assert_eq!(z.bound.to_f64(), 6.0);
        assert_eq!(x.sub(&y).bound.to_f64(), 2.0);
        assert_eq!(x.scale(&ExactScalar::from_int(-3)).bound.to_f64(), 3.0);
        assert!(Estimate::zero(p).is_exact());
    }
}
