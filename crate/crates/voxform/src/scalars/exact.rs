//! Gaussian rationals `x + iy` with arbitrary-precision parts.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::VoxError;

/// Exact Gaussian rational. Arithmetic never rounds.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct ExactScalar(Complex<BigRational>);

impl ExactScalar {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        ExactScalar(Complex::new(re, im))
    }

    pub fn zero() -> Self {
        ExactScalar(Complex::new(BigRational::zero(), BigRational::zero()))
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    pub fn i() -> Self {
        ExactScalar(Complex::new(BigRational::zero(), BigRational::one()))
    }

    pub fn from_int(n: i64) -> Self {
        Self::real(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn from_bigint(n: BigInt) -> Self {
        Self::real(BigRational::from_integer(n))
    }

    /// `p/q`; panics when `q == 0`.
    pub fn ratio(p: i64, q: i64) -> Self {
        Self::real(BigRational::new(BigInt::from(p), BigInt::from(q)))
    }

    /// `p/q + (r/s) i`.
    pub fn gaussian(p: i64, q: i64, r: i64, s: i64) -> Self {
        ExactScalar(Complex::new(
            BigRational::new(BigInt::from(p), BigInt::from(q)),
            BigRational::new(BigInt::from(r), BigInt::from(s)),
        ))
    }

    pub fn real(re: BigRational) -> Self {
        ExactScalar(Complex::new(re, BigRational::zero()))
    }

    pub fn re(&self) -> &BigRational {
        &self.0.re
    }

    pub fn im(&self) -> &BigRational {
        &self.0.im
    }

    pub fn is_zero(&self) -> bool {
        self.0.re.is_zero() && self.0.im.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.re.is_one() && self.0.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.0.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        ExactScalar(self.0.conj())
    }

    /// `|z|²`, exact.
    pub fn norm_sqr(&self) -> BigRational {
        &self.0.re * &self.0.re + &self.0.im * &self.0.im
    }

    pub fn inv(&self) -> Result<Self, VoxError> {
        if self.is_zero() {
            return Err(VoxError::DivisionByZero);
        }
        let n = self.norm_sqr();
        Ok(ExactScalar(Complex::new(&self.0.re / &n, -(&self.0.im / &n))))
    }

    /// Integer power; negative exponents invert (panics on `0^-k`).
    pub fn powi(&self, e: i64) -> Self {
        if e < 0 {
            return self.inv().expect("negative power of zero").powi(-e);
        }
        let mut base = self.clone();
        let mut acc = Self::one();
        let mut k = e as u64;
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    pub fn scale_int(&self, k: &BigInt) -> Self {
        ExactScalar(Complex::new(&self.0.re * k, &self.0.im * k))
    }

    pub fn scale(&self, k: &BigRational) -> Self {
        ExactScalar(Complex::new(&self.0.re * k, &self.0.im * k))
    }

    pub fn as_complex(&self) -> &Complex<BigRational> {
        &self.0
    }

    /// Exact square root when both parts of some root are rational.
    pub fn exact_sqrt(&self) -> Option<Self> {
        if self.is_zero() {
            return Some(Self::zero());
        }
        // (u + iv)^2 = re + i im  =>  u^2 = (|z| + re)/2, v^2 = (|z| - re)/2
        let modulus = rational_sqrt(&self.norm_sqr())?;
        let two = BigRational::from_integer(BigInt::from(2));
        let u = rational_sqrt(&((&modulus + &self.0.re) / &two))?;
        let mut v = rational_sqrt(&((&modulus - &self.0.re) / &two))?;
        if self.0.im.is_negative() {
            v = -v;
        }
        let root = ExactScalar::new(u, v);
        debug_assert_eq!(&(&root * &root), self);
        Some(root)
    }
}

/// Square root of a non-negative rational when it is itself rational.
pub fn rational_sqrt(q: &BigRational) -> Option<BigRational> {
    if q.is_negative() {
        return None;
    }
    let n = q.numer().sqrt();
    let d = q.denom().sqrt();
    if &(&n * &n) == q.numer() && &(&d * &d) == q.denom() {
        Some(BigRational::new(n, d))
    } else {
        None
    }
}

fn fmt_rational(q: &BigRational) -> String {
    if q.denom().is_one() {
        format!("{}", q.numer())
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

impl fmt::Display for ExactScalar {
    /// Writes the config literal form: `p/q`, `r/s i`, or `p/q+r/s i`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let re = &self.0.re;
        let im = &self.0.im;
        if im.is_zero() {
            return write!(f, "{}", fmt_rational(re));
        }
        if re.is_zero() {
            return write!(f, "{} i", fmt_rational(im));
        }
        if im.is_negative() {
            write!(f, "{}-{} i", fmt_rational(re), fmt_rational(&-im))
        } else {
            write!(f, "{}+{} i", fmt_rational(re), fmt_rational(im))
        }
    }
}

impl fmt::Debug for ExactScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

fn parse_rational(s: &str) -> Result<BigRational, VoxError> {
    let s = s.trim();
    let bad = || VoxError::Parse(format!("bad rational literal '{s}'"));
    if s.is_empty() {
        return Err(bad());
    }
    match s.split_once('/') {
        Some((p, q)) => {
            let p = BigInt::from_str(p.trim()).map_err(|_| bad())?;
            let q = BigInt::from_str(q.trim()).map_err(|_| bad())?;
            if q.is_zero() {
                return Err(bad());
            }
            Ok(BigRational::new(p, q))
        }
        None => Ok(BigRational::from_integer(BigInt::from_str(s).map_err(|_| bad())?)),
    }
}

impl FromStr for ExactScalar {
    type Err = VoxError;

    /// Accepts `p/q`, `r/s i`, `p/q+r/s i`, `p/q-r/s i` and bare `i`.
    fn from_str(s: &str) -> Result<Self, VoxError> {
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if t.is_empty() {
            return Err(VoxError::Parse("empty scalar literal".into()));
        }
        let Some(body) = t.strip_suffix('i') else {
            return Ok(ExactScalar::real(parse_rational(&t)?));
        };
        // split at the last sign that is not the leading one
        let split = body
            .char_indices()
            .skip(1)
            .filter(|(_, c)| *c == '+' || *c == '-')
            .map(|(k, _)| k)
            .last();
        let (re, im) = match split {
            Some(k) => (&body[..k], &body[k..]),
            None => ("0", body),
        };
        let im = match im {
            "" | "+" => BigRational::one(),
            "-" => -BigRational::one(),
            other => parse_rational(other.trim_start_matches('+'))?,
        };
        Ok(ExactScalar::new(parse_rational(re)?, im))
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $op:tt) => {
        impl<'a, 'b> $tr<&'b ExactScalar> for &'a ExactScalar {
            type Output = ExactScalar;
            fn $m(self, rhs: &'b ExactScalar) -> ExactScalar {
                ExactScalar(&self.0 $op &rhs.0)
            }
        }
        impl $tr<ExactScalar> for ExactScalar {
            type Output = ExactScalar;
            fn $m(self, rhs: ExactScalar) -> ExactScalar {
                ExactScalar(self.0 $op rhs.0)
            }
        }
        impl<'b> $tr<&'b ExactScalar> for ExactScalar {
            type Output = ExactScalar;
            fn $m(self, rhs: &'b ExactScalar) -> ExactScalar {
                ExactScalar(&self.0 $op &rhs.0)
            }
        }
        impl<'a> $tr<ExactScalar> for &'a ExactScalar {
            type Output = ExactScalar;
            fn $m(self, rhs: ExactScalar) -> ExactScalar {
                ExactScalar(&self.0 $op &rhs.0)
            }
        }
    };
}

binop!(Add, add, +);
binop!(Sub, sub, -);
binop!(Mul, mul, *);

impl<'a, 'b> Div<&'b ExactScalar> for &'a ExactScalar {
    type Output = ExactScalar;
    /// Panics on division by zero; use [`ExactScalar::inv`] for a checked path.
    fn div(self, rhs: &'b ExactScalar) -> ExactScalar {
        self * &rhs.inv().expect("division by zero")
    }
}

impl Div<ExactScalar> for ExactScalar {
    type Output = ExactScalar;
    fn div(self, rhs: ExactScalar) -> ExactScalar {
        &self / &rhs
    }
}

impl Neg for ExactScalar {
    type Output = ExactScalar;
    fn neg(self) -> ExactScalar {
        ExactScalar(-self.0)
    }
}

impl<'a> Neg for &'a ExactScalar {
    type Output = ExactScalar;
    fn neg(self) -> ExactScalar {
        ExactScalar(-self.0.clone())
    }
}

impl AddAssign<&ExactScalar> for ExactScalar {
    fn add_assign(&mut self, rhs: &ExactScalar) {
        self.0.re += &rhs.0.re;
        self.0.im += &rhs.0.im;
    }
}

impl AddAssign<ExactScalar> for ExactScalar {
    fn add_assign(&mut self, rhs: ExactScalar) {
        self.0.re += rhs.0.re;
        self.0.im += rhs.0.im;
    }
}

impl SubAssign<&ExactScalar> for ExactScalar {
    fn sub_assign(&mut self, rhs: &ExactScalar) {
        self.0.re -= &rhs.0.re;
        self.0.im -= &rhs.0.im;
    }
}

impl MulAssign<&ExactScalar> for ExactScalar {
    fn mul_assign(&mut self, rhs: &ExactScalar) {
        self.0 = &self.0 * &rhs.0;
    }
}

impl From<i64> for ExactScalar {
    fn from(n: i64) -> Self {
        ExactScalar::from_int(n)
    }
}

impl From<BigRational> for ExactScalar {
    fn from(q: BigRational) -> Self {
        ExactScalar::real(q)
    }
}

impl std::iter::Sum for ExactScalar {
    fn sum<I: Iterator<Item = ExactScalar>>(iter: I) -> Self {
        iter.fold(ExactScalar::zero(), |a, b| a + b)
    }
}

impl<'a> std::iter::Sum<&'a ExactScalar> for ExactScalar {
    fn sum<I: Iterator<Item = &'a ExactScalar>>(iter: I) -> Self {
        iter.fold(ExactScalar::zero(), |a, b| a + b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_roundtrip() {
        for lit in ["3/4", "-1/2", "5", "1/2+3/4 i", "1/2-3/4 i", "-7/3 i", "0"] {
            let x: ExactScalar = lit.parse().unwrap();
            let again: ExactScalar = x.to_string().parse().unwrap();
            assert_eq!(x, again, "{lit}");
        }
        let i: ExactScalar = "i".parse().unwrap();
        assert_eq!(i, ExactScalar::i());
        let z: ExactScalar = "1/2 + 1/3 i".parse().unwrap();
        assert_eq!(z, ExactScalar::gaussian(1, 2, 1, 3));
        assert!("1/0".parse::<ExactScalar>().is_err());
        assert!("abc".parse::<ExactScalar>().is_err());
    }

    #[test]
    fn gaussian_arithmetic() {
        let a = ExactScalar::gaussian(1, 2, 1, 3);
        let b = ExactScalar::gaussian(-2, 5, 3, 7);
        assert_eq!(&(&a + &b) - &b, a);
        assert_eq!(&(&a * &b) / &b, a);
        assert_eq!(&ExactScalar::i() * &ExactScalar::i(), ExactScalar::from_int(-1));
        assert_eq!(a.powi(3), &(&a * &a) * &a);
        assert_eq!(&a.powi(-2) * &a.powi(2), ExactScalar::one());
        assert!(ExactScalar::zero().inv().is_err());
    }

    #[test]
    fn exact_square_roots() {
        let q = ExactScalar::ratio(1, 16);
        assert_eq!(q.exact_sqrt(), Some(ExactScalar::ratio(1, 4)));
        let m = ExactScalar::ratio(-1, 16);
        assert_eq!(m.exact_sqrt(), Some(ExactScalar::gaussian(0, 1, 1, 4)));
        let w = ExactScalar::gaussian(0, 1, 2, 1); // (1+i)^2 = 2i
        assert_eq!(w.exact_sqrt(), Some(ExactScalar::gaussian(1, 1, 1, 1)));
        assert_eq!(ExactScalar::from_int(2).exact_sqrt(), None);
    }
}
