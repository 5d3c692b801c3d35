//! Cauchy-type bounds on the level coefficients of a product.

use std::cmp::Ordering;

use num_rational::BigRational;

use super::{native_eval, EpsProductSpec, FactorVariant, ProductSpec};
use crate::error::Result;
use crate::forms::{ConvergenceReport, EvalMode};
use crate::report::{Check, Report};
use crate::scalars::{ApproxScalar, ExactScalar, Precision};
use crate::voa::DualVector;

/// `|c_l| ≤ C·M·R^{−l}` with `M` the grid maximum of `Σ c_l s^l` over `|s| ≤ R`.
#[derive(Clone, Debug)]
pub struct CauchyEstimate {
    pub m: ApproxScalar,
    pub r: ApproxScalar,
    pub r1: ApproxScalar,
    pub r2: ApproxScalar,
    /// Smallest `C` that makes the bound hold on the checked levels.
    pub constant: ApproxScalar,
    pub grid: usize,
    pub from_level: u32,
}

/// Exact points on the unit circle near the `n`-th roots of unity, via `((1−t²) + 2ti)/(1+t²)`.
fn circle_points(n: usize) -> Vec<ExactScalar> {
    (0..n)
        .map(|k| {
            let half = std::f64::consts::PI * k as f64 / n as f64;
            if 2 * k == n {
                return -ExactScalar::one();
            }
            let t = BigRational::new(((half.tan() * 1000.0).round() as i64).into(), 1000.into());
            let one = BigRational::from_integer(1.into());
            let den = &one + &t * &t;
            ExactScalar::new((&one - &t * &t) / &den, (BigRational::from_integer(2.into()) * &t) / &den)
        })
        .collect()
}

fn horner(c: &[ExactScalar], s: &ExactScalar) -> ExactScalar {
    c.iter().rev().fold(ExactScalar::zero(), |acc, x| acc * s + x)
}

/// Grid estimate with `grid` radii and `grid` angles over `|s| ≤ r₁r₂`.
pub fn cauchy_estimate_on(spec: &ProductSpec, levels: &[ExactScalar], prec: Precision, grid: usize, from_level: u32) -> CauchyEstimate {
    let r_exact = &spec.r1 * &spec.r2;
    let circle = circle_points(grid.max(1));
    let mut m = ApproxScalar::zero(prec);
    for j in 1..=grid.max(1) {
        let rho = ExactScalar::real(&r_exact * BigRational::new((j as i64).into(), (grid.max(1) as i64).into()));
        for w in &circle {
            let val = ApproxScalar::from_exact(&horner(levels, &(&rho * w)), prec).abs();
            m = m.max(val);
        }
    }
    let r = ApproxScalar::from_rational(&r_exact, prec);
    let mut constant = ApproxScalar::zero(prec);
    if m.cmp_re(&ApproxScalar::zero(prec)) == Ordering::Greater {
        for (l, c) in levels.iter().enumerate().skip(from_level as usize) {
            let ratio = ApproxScalar::from_exact(c, prec).abs().mul(&r.powi(l as i64)).div(&m);
            constant = constant.max(ratio);
        }
    }
    CauchyEstimate {
        m,
        r,
        r1: ApproxScalar::from_rational(&spec.r1, prec),
        r2: ApproxScalar::from_rational(&spec.r2, prec),
        constant: constant.inflate(),
        grid,
        from_level,
    }
}

/// Default 5×5 grid from level 2.
pub fn cauchy_estimate(spec: &ProductSpec, levels: &[ExactScalar], prec: Precision) -> Result<CauchyEstimate> {
    Ok(cauchy_estimate_on(spec, levels, prec, 5, 2))
}

/// Level coefficients with the grid estimate and the decay certificate; the shape
/// constant is asserted against `max_constant`.
pub fn cauchy_report(spec: &EpsProductSpec, wprime: &DualVector, max_constant: &ApproxScalar) -> Result<ConvergenceReport> {
    let prec = Precision::from_env();
    let out = native_eval(spec, wprime, &FactorVariant::Plain, EvalMode::Exact)?;
    let kind = spec.kind_spec(super::RightChart::Native)?;
    let est = cauchy_estimate(&kind, &out.levels, prec)?;
    let mut checks = Report::new();
    checks.push(
        Check::bounded("cauchy.shape", "level coefficients obey a Cauchy bound with grid-estimated sup", &est.constant, max_constant)
            .with_detail(format!("M={} R={}", est.m.sci_string(), est.r.sci_string())),
    );
    let cert = out.terms.certify(prec);
    match &cert {
        Ok(c) => checks.push(Check::bounded(
            "cauchy.ratio",
            "level terms decay geometrically",
            &c.ratio,
            &ApproxScalar::one(prec),
        )),
        Err(e) => checks.push(Check::error("cauchy.ratio", "level terms decay geometrically", e)),
    }
    Ok(ConvergenceReport {
        levels: out.levels.clone(),
        value: out.value.value,
        ratio: cert.as_ref().ok().map(|c| c.ratio.clone()),
        tail: cert.ok().map(|c| c.tail),
        cauchy: Some(est),
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_points_are_unimodular() {
        for p in circle_points(5) {
            assert_eq!(p.norm_sqr(), BigRational::from_integer(1.into()));
        }
        assert_eq!(circle_points(4)[2], -ExactScalar::one());
    }

    #[test]
    fn generator_shape_constant() {
        let spec = super::super::tests::generator_spec(12);
        let rep = cauchy_report(&spec, &DualVector::vacuum(), &ApproxScalar::from_int(4, Precision(128))).unwrap();
        assert!(rep.checks.all_pass(), "{:?}", rep.checks);
    }
}
