//! Two-sphere sewing geometry: disks, annuli and the pinching relation.

use std::fmt;

use num_rational::BigRational;
use num_traits::Signed;

use crate::error::{Result, VoxError};
use crate::pairing::{lambda_from_epsilon, lambda_sq_from_epsilon};
use crate::report::{Check, Report};
use crate::scalars::ExactScalar;

/// Sewing data for two spheres glued along annuli.
#[derive(Clone, Debug, PartialEq)]
pub struct SphereConfig {
    pub r1: BigRational,
    pub r2: BigRational,
    pub epsilon: ExactScalar,
    pub zeta1: ExactScalar,
    pub zeta2: ExactScalar,
    pub x_points: Vec<ExactScalar>,
    pub y_points: Vec<ExactScalar>,
}

/// A violated sewing condition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    NonPositiveRadius,
    SewingRelation,
    RadiusProduct,
    LeftPointInDisk(usize),
    RightPointInDisk(usize),
    LeftAnnulus,
    RightAnnulus,
    CoincidentPoints,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NonPositiveRadius => write!(f, "radii must be positive"),
            Violation::SewingRelation => write!(f, "zeta1*zeta2 != epsilon"),
            Violation::RadiusProduct => write!(f, "|epsilon| > r1*r2"),
            Violation::LeftPointInDisk(i) => write!(f, "|x{i}| < |epsilon|/r2"),
            Violation::RightPointInDisk(j) => write!(f, "|y{j}| < |epsilon|/r1"),
            Violation::LeftAnnulus => write!(f, "zeta1 outside |epsilon|/r2 <= |zeta1| <= r1"),
            Violation::RightAnnulus => write!(f, "zeta2 outside |epsilon|/r1 <= |zeta2| <= r2"),
            Violation::CoincidentPoints => write!(f, "sample points coincide"),
        }
    }
}

/// Outcome of [`validate_config`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidityReport {
    pub violations: Vec<Violation>,
}

impl ValidityReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

fn sq(q: &BigRational) -> BigRational {
    q * q
}

fn in_annulus(zeta: &ExactScalar, eps_abs_sq: &BigRational, r_other: &BigRational, r_own: &BigRational) -> bool {
    let m = zeta.norm_sqr();
    m * sq(r_other) >= *eps_abs_sq && zeta.norm_sqr() <= sq(r_own)
}

impl SphereConfig {
    /// Configuration with `ζ₂` chosen by the sewing relation.
    pub fn with_partner(r1: BigRational, r2: BigRational, epsilon: ExactScalar, zeta1: ExactScalar) -> Result<Self> {
        let zeta2 = sewing_partner(&zeta1, &epsilon)?;
        Ok(SphereConfig { r1, r2, epsilon, zeta1, zeta2, x_points: vec![], y_points: vec![] })
    }

    pub fn with_points(mut self, x: Vec<ExactScalar>, y: Vec<ExactScalar>) -> Self {
        self.x_points = x;
        self.y_points = y;
        self
    }
}

/// Checks every sewing condition exactly and lists the violated ones.
pub fn validate_config(cfg: &SphereConfig) -> ValidityReport {
    let mut v = Vec::new();
    if !cfg.r1.is_positive() || !cfg.r2.is_positive() {
        return ValidityReport { violations: vec![Violation::NonPositiveRadius] };
    }
    if &cfg.zeta1 * &cfg.zeta2 != cfg.epsilon {
        v.push(Violation::SewingRelation);
    }
    let eps_sq = cfg.epsilon.norm_sqr();
    if eps_sq > sq(&(&cfg.r1 * &cfg.r2)) {
        v.push(Violation::RadiusProduct);
    }
    for (i, x) in cfg.x_points.iter().enumerate() {
        if x.norm_sqr() * sq(&cfg.r2) < eps_sq {
            v.push(Violation::LeftPointInDisk(i));
        }
    }
    for (j, y) in cfg.y_points.iter().enumerate() {
        if y.norm_sqr() * sq(&cfg.r1) < eps_sq {
            v.push(Violation::RightPointInDisk(j));
        }
    }
    if !in_annulus(&cfg.zeta1, &eps_sq, &cfg.r2, &cfg.r1) {
        v.push(Violation::LeftAnnulus);
    }
    if !in_annulus(&cfg.zeta2, &eps_sq, &cfg.r1, &cfg.r2) {
        v.push(Violation::RightAnnulus);
    }
    let all: Vec<&ExactScalar> = cfg.x_points.iter().chain(&cfg.y_points).collect();
    if (0..all.len()).any(|i| all[..i].contains(&all[i])) {
        v.push(Violation::CoincidentPoints);
    }
    ValidityReport { violations: v }
}

/// `ζ₂ = ε/ζ₁`.
pub fn sewing_partner(zeta1: &ExactScalar, epsilon: &ExactScalar) -> Result<ExactScalar> {
    if zeta1.is_zero() {
        return Err(VoxError::PoleAtOrigin);
    }
    Ok(epsilon * &zeta1.inv()?)
}

/// `z ↦ −λ²/z`.
#[derive(Clone, Debug, PartialEq)]
pub struct MobiusGamma {
    pub lambda_sq: ExactScalar,
}

impl MobiusGamma {
    pub fn apply(&self, z: &ExactScalar) -> Result<ExactScalar> {
        if z.is_zero() {
            return Err(VoxError::PoleAtOrigin);
        }
        Ok(-(&self.lambda_sq * &z.inv()?))
    }
}

pub fn mobius_gamma(lambda: &ExactScalar) -> Result<MobiusGamma> {
    if lambda.is_zero() {
        return Err(VoxError::InvalidArgument("λ must be nonzero".into()));
    }
    Ok(MobiusGamma { lambda_sq: lambda * lambda })
}

/// The map for `λ = −ξ ε^{1/2}`; only `λ²` enters, so no root is taken.
pub fn mobius_from_epsilon(epsilon: &ExactScalar, xi: &ExactScalar) -> Result<MobiusGamma> {
    if epsilon.is_zero() {
        return Err(VoxError::InvalidArgument("ε must be nonzero".into()));
    }
    Ok(MobiusGamma { lambda_sq: lambda_sq_from_epsilon(epsilon, xi) })
}

/// The canonical configuration: unit radii, `ε = 1/4`, `ζ₁ = ζ₂ = 1/2`.
pub fn canonical_config() -> SphereConfig {
    let one = BigRational::from_integer(1.into());
    SphereConfig::with_partner(one.clone(), one, ExactScalar::ratio(1, 4), ExactScalar::ratio(1, 2))
        .expect("nonzero ζ₁")
        .with_points(vec![ExactScalar::ratio(2, 1), ExactScalar::gaussian(0, 1, 1, 1)], vec![ExactScalar::ratio(3, 1)])
}

/// Single-condition perturbations of the canonical configuration, with the violation each should raise.
pub fn perturbations() -> Vec<(SphereConfig, Violation)> {
    let base = canonical_config();
    let q = |p: i64, d: i64| BigRational::new(p.into(), d.into());
    let mut out = Vec::new();
    let mut c = base.clone();
    c.zeta2 = ExactScalar::ratio(1, 3);
    out.push((c, Violation::SewingRelation));
    let mut c = base.clone();
    c.r1 = q(2, 5);
    c.r2 = q(2, 5);
    out.push((c, Violation::RadiusProduct));
    let mut c = base.clone();
    c.x_points[0] = ExactScalar::ratio(1, 8);
    out.push((c, Violation::LeftPointInDisk(0)));
    let mut c = base.clone();
    c.y_points[0] = ExactScalar::gaussian(0, 1, -1, 8);
    out.push((c, Violation::RightPointInDisk(0)));
    let mut c = base.clone();
    c.zeta1 = ExactScalar::ratio(2, 1);
    c.zeta2 = ExactScalar::ratio(1, 8);
    out.push((c, Violation::LeftAnnulus));
    out
}

/// Sewing-domain checks: acceptance of the canonical configuration, rejection of each
/// perturbation, the partner involution and the Möbius map for both `ξ`.
pub fn check_sewing(samples: &[ExactScalar]) -> Report {
    let mut rep = Report::new();
    let base = canonical_config();
    rep.push(
        Check::predicate("sewing.canonical", "canonical two-sphere configuration is admissible", validate_config(&base).is_valid())
            .with_detail(format!("{:?}", validate_config(&base).violations)),
    );
    for (k, (cfg, expected)) in perturbations().into_iter().enumerate() {
        let got = validate_config(&cfg).violations;
        let ok = got.contains(&expected);
        rep.push(
            Check::predicate(&format!("sewing.reject{k}"), "single-condition perturbation is rejected", ok)
                .with_detail(format!("expected {expected}; got {}", got.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))),
        );
    }
    let partner = samples.iter().filter(|z| !z.is_zero()).all(|z| {
        let eps = &base.epsilon;
        sewing_partner(z, eps).and_then(|p| sewing_partner(&p, eps)).is_ok_and(|back| back == *z)
    });
    rep.push(Check::predicate("sewing.partner_involution", "sewing partner is an involution", partner));
    for (name, xi) in [("plus", ExactScalar::i()), ("minus", -ExactScalar::i())] {
        let id = format!("sewing.mobius_{name}");
        let anchor = "Möbius map with the sewing-coupled parameter is z to epsilon over z";
        let r = (|| -> Result<Check> {
            let eps = &base.epsilon;
            let from_eps = mobius_from_epsilon(eps, &xi)?;
            let from_lambda = mobius_gamma(&lambda_from_epsilon(eps, &xi)?)?;
            let mut worst = ExactScalar::zero();
            for z in samples.iter().filter(|z| !z.is_zero()) {
                let target = eps * &z.inv()?;
                let d1 = from_eps.apply(z)? - &target;
                let d2 = from_lambda.apply(z)? - &target;
                let back = from_eps.apply(&from_eps.apply(z)?)? - z;
                for d in [d1, d2, back] {
                    if !d.is_zero() {
                        worst = d;
                    }
                }
            }
            Ok(Check::exact(&id, anchor, &worst))
        })();
        rep.push_result(&id, anchor, r);
    }
    rep
}
