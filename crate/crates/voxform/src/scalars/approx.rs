//! Binary floating values at a configurable precision, used for square roots,
//! moduli and convergence bounds.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use dashu_float::round::mode::HalfEven;
use dashu_float::FBig;
use dashu_int::IBig;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::exact::ExactScalar;

type Float = FBig<HalfEven, 2>;

/// Environment variable overriding the working precision in bits.
pub const PRECISION_ENV: &str = "VOXFORM_PRECISION_BITS";

/// Working precision in bits.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Precision(pub usize);

impl Default for Precision {
    fn default() -> Self {
        Precision(128)
    }
}

impl Precision {
    /// Reads `VOXFORM_PRECISION_BITS`, falling back to 128 bits.
    pub fn from_env() -> Self {
        std::env::var(PRECISION_ENV)
            .ok()
            .and_then(|s| s.trim().parse::<usize>().ok())
            .filter(|&p| p >= 24)
            .map(Precision)
            .unwrap_or_default()
    }

    /// Unit roundoff bound `2^{1-P}`.
    pub fn unit_roundoff(self) -> ApproxScalar {
        ApproxScalar::from_rational(
            &BigRational::new(BigInt::one(), BigInt::one() << (self.0 - 1)),
            self,
        )
    }
}

/// Complex floating value `re + i im` at precision `P`.
#[derive(Clone)]
pub struct ApproxScalar {
    re: Float,
    im: Float,
    prec: Precision,
}

fn to_ibig(n: &BigInt) -> IBig {
    IBig::from_str(&n.to_str_radix(10)).expect("integer conversion")
}

fn to_bigint(n: &IBig) -> BigInt {
    BigInt::from_str(&n.to_string()).expect("integer conversion")
}

fn float_of(q: &BigRational, prec: Precision) -> Float {
    let n = Float::from(to_ibig(q.numer())).with_precision(prec.0).value();
    let d = Float::from(to_ibig(q.denom())).with_precision(prec.0).value();
    n / d
}

fn rational_of(x: &Float) -> BigRational {
    let repr = x.repr();
    let sig = to_bigint(repr.significand());
    let e = repr.exponent();
    if e >= 0 {
        BigRational::from_integer(sig << (e as usize))
    } else {
        BigRational::new(sig, BigInt::one() << ((-e) as usize))
    }
}

impl ApproxScalar {
    pub fn zero(prec: Precision) -> Self {
        Self::from_rational(&BigRational::zero(), prec)
    }

    pub fn one(prec: Precision) -> Self {
        Self::from_rational(&BigRational::one(), prec)
    }

    pub fn from_int(n: i64, prec: Precision) -> Self {
        Self::from_rational(&BigRational::from_integer(BigInt::from(n)), prec)
    }

    pub fn from_rational(q: &BigRational, prec: Precision) -> Self {
        ApproxScalar {
            re: float_of(q, prec),
            im: float_of(&BigRational::zero(), prec),
            prec,
        }
    }

    pub fn from_exact(z: &ExactScalar, prec: Precision) -> Self {
        ApproxScalar {
            re: float_of(z.re(), prec),
            im: float_of(z.im(), prec),
            prec,
        }
    }

    pub fn precision(&self) -> Precision {
        self.prec
    }

    /// Per-operation relative error bound `2^{1-P}`.
    pub fn eps(&self) -> ApproxScalar {
        self.prec.unit_roundoff()
    }

    fn wrap(&self, re: Float, im: Float) -> Self {
        ApproxScalar { re, im, prec: self.prec }
    }

    fn zero_float(&self) -> Float {
        float_of(&BigRational::zero(), self.prec)
    }

    pub fn is_real(&self) -> bool {
        self.im.repr().significand().is_zero()
    }

    pub fn re_rational(&self) -> BigRational {
        rational_of(&self.re)
    }

    pub fn im_rational(&self) -> BigRational {
        rational_of(&self.im)
    }

    /// Exact value of the stored real part as a Gaussian rational.
    pub fn to_exact(&self) -> ExactScalar {
        ExactScalar::new(rational_of(&self.re), rational_of(&self.im))
    }

    pub fn to_f64(&self) -> f64 {
        self.re.to_f64().value()
    }

    pub fn add(&self, o: &Self) -> Self {
        self.wrap(&self.re + &o.re, &self.im + &o.im)
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.wrap(&self.re - &o.re, &self.im - &o.im)
    }

    pub fn mul(&self, o: &Self) -> Self {
        let re = &self.re * &o.re - &self.im * &o.im;
        let im = &self.re * &o.im + &self.im * &o.re;
        self.wrap(re, im)
    }

    pub fn div(&self, o: &Self) -> Self {
        let den = &o.re * &o.re + &o.im * &o.im;
        let re = (&self.re * &o.re + &self.im * &o.im) / &den;
        let im = (&self.im * &o.re - &self.re * &o.im) / &den;
        self.wrap(re, im)
    }

    pub fn powi(&self, e: i64) -> Self {
        if e < 0 {
            return Self::one(self.prec).div(&self.powi(-e));
        }
        let mut acc = Self::one(self.prec);
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// Modulus, as a real value.
    pub fn abs(&self) -> Self {
        let n = &self.re * &self.re + &self.im * &self.im;
        self.wrap(n.sqrt(), self.zero_float())
    }

    /// Principal square root.
    pub fn sqrt(&self) -> Self {
        if self.is_real() && self.re >= self.zero_float() {
            return self.wrap(self.re.sqrt(), self.zero_float());
        }
        let modulus = self.abs().re;
        let two = float_of(&BigRational::from_integer(BigInt::from(2)), self.prec);
        let u = ((&modulus + &self.re) / &two).sqrt();
        let mut v = ((&modulus - &self.re) / &two).sqrt();
        if self.im < self.zero_float() {
            v = -v;
        }
        self.wrap(u, v)
    }

    /// Real `k`-th root of a non-negative real value.
    pub fn nth_root(&self, k: u32) -> Self {
        if k == 1 || self.re.repr().significand().is_zero() {
            return self.clone();
        }
        let exp = float_of(&BigRational::new(BigInt::one(), BigInt::from(k)), self.prec);
        self.wrap(self.re.powf(&exp), self.zero_float())
    }

    /// Short scientific rendering of the real part, for reports.
    pub fn sci_string(&self) -> String {
        let x = self.to_f64();
        if x == 0.0 {
            "0".to_string()
        } else {
            format!("{x:.6e}")
        }
    }

    /// Real-part maximum.
    pub fn max(self, o: Self) -> Self {
        if o.re > self.re {
            o
        } else {
            self
        }
    }

    /// Ordering of real parts.
    pub fn cmp_re(&self, o: &Self) -> Ordering {
        self.re.partial_cmp(&o.re).unwrap_or(Ordering::Equal)
    }

    /// Inflates a non-negative bound by a few ulps so it stays an upper bound.
    pub fn inflate(&self) -> Self {
        let k = Self::one(self.prec).add(&self.eps().mul(&Self::from_int(4, self.prec)));
        self.mul(&k)
    }

    /// Exact decimal expansion of the stored real part (terminates: dyadic).
    pub fn decimal_string(&self) -> String {
        dyadic_decimal(&self.re_rational())
    }
}

/// Exact decimal expansion of a rational whose denominator divides a power
/// of ten; other rationals are printed as `p/q`.
pub fn dyadic_decimal(q: &BigRational) -> String {
    let mut den = q.denom().clone();
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    let (mut e2, mut e5) = (0usize, 0usize);
    while (&den % &two).is_zero() {
        den /= &two;
        e2 += 1;
    }
    while (&den % &five).is_zero() {
        den /= &five;
        e5 += 1;
    }
    if !den.is_one() {
        return format!("{}/{}", q.numer(), q.denom());
    }
    let digits = e2.max(e5);
    let scaled = q * BigRational::from_integer(num_traits::pow(BigInt::from(10), digits));
    let n = scaled.to_integer();
    let neg = n.is_negative();
    let s = n.abs().to_string();
    if digits == 0 {
        return format!("{}{}", if neg { "-" } else { "" }, s);
    }
    let padded = format!("{:0>width$}", s, width = digits + 1);
    let (int, frac) = padded.split_at(padded.len() - digits);
    format!("{}{}.{}", if neg { "-" } else { "" }, int, frac)
}

impl fmt::Debug for ApproxScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_real() {
            write!(f, "{:e}", self.to_f64())
        } else {
            write!(f, "{:e}+{:e}i", self.to_f64(), self.im.to_f64().value())
        }
    }
}

impl PartialEq for ApproxScalar {
    fn eq(&self, o: &Self) -> bool {
        self.re == o.re && self.im == o.im
    }
}
