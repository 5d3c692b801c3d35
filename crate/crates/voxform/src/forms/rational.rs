//! Rational functions recovered from exact samples under a pole ansatz.

use std::collections::BTreeMap;

use crate::error::{Result, VoxError};
use crate::scalars::linalg::{solve, Matrix};
use crate::scalars::ExactScalar;

/// A pole locus `z_i = z_j`, or `z_i = 0` when `j` is absent.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Locus {
    pub i: usize,
    pub j: Option<usize>,
}

impl Locus {
    fn factor(&self, pts: &[ExactScalar]) -> ExactScalar {
        match self.j {
            Some(j) => &pts[self.i] - &pts[j],
            None => pts[self.i].clone(),
        }
    }
}

/// Admissible poles with their order caps.
#[derive(Clone, Debug)]
pub struct PoleAnsatz {
    pub poles: Vec<(Locus, u32)>,
    pub max_numerator_degree: u32,
}

impl PoleAnsatz {
    /// Coincidence poles `z_i = z_j` of order ≤ `cap`, plus origin poles when `with_origin`.
    pub fn coincidences(n: usize, cap: u32, with_origin: bool) -> Self {
        let mut poles = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                poles.push((Locus { i, j: Some(j) }, cap));
            }
        }
        if with_origin {
            poles.extend((0..n).map(|i| (Locus { i, j: None }, cap)));
        }
        let total: u32 = poles.iter().map(|p| p.1).sum();
        PoleAnsatz { poles, max_numerator_degree: total + 2 }
    }

    /// Only the listed coincidences, each with its own cap.
    pub fn with_poles(poles: Vec<(Locus, u32)>) -> Self {
        let total: u32 = poles.iter().map(|p| p.1).sum();
        PoleAnsatz { poles, max_numerator_degree: total + 2 }
    }
}

type Monomial = Vec<u32>;

/// `P(z) / ∏ (locus)^{order}` with exact coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalReconstruction {
    pub vars: usize,
    pub numerator: BTreeMap<Monomial, ExactScalar>,
    pub poles: Vec<(Locus, u32)>,
}

fn monomials(vars: usize, degree: u32) -> Vec<Monomial> {
    fn rec(prefix: &mut Vec<u32>, left: usize, budget: u32, out: &mut Vec<Monomial>) {
        if left == 0 {
            out.push(prefix.clone());
            return;
        }
        for e in 0..=budget {
            prefix.push(e);
            rec(prefix, left - 1, budget - e, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), vars, degree, &mut out);
    out.sort_by_key(|m| (m.iter().sum::<u32>(), std::cmp::Reverse(m.clone())));
    out
}

fn monomial_value(m: &[u32], pts: &[ExactScalar]) -> ExactScalar {
    m.iter().zip(pts).fold(ExactScalar::one(), |acc, (&e, z)| acc * z.powi(e as i64))
}

fn denominator(poles: &[(Locus, u32)], pts: &[ExactScalar]) -> ExactScalar {
    poles.iter().fold(ExactScalar::one(), |acc, (l, o)| acc * l.factor(pts).powi(*o as i64))
}

impl RationalReconstruction {
    pub fn eval(&self, pts: &[ExactScalar]) -> Result<ExactScalar> {
        let num: ExactScalar = self.numerator.iter().map(|(m, c)| c * &monomial_value(m, pts)).sum();
        Ok(num * denominator(&self.poles, pts).inv()?)
    }

    /// Order of the pole on the given locus (0 when absent).
    pub fn pole_order(&self, locus: Locus) -> u32 {
        self.poles.iter().find(|(l, _)| *l == locus).map_or(0, |p| p.1)
    }

    pub fn numerator_degree(&self) -> u32 {
        self.numerator.keys().map(|m| m.iter().sum()).max().unwrap_or(0)
    }

    /// Agreement with another reconstruction as rational functions,
    /// tested by cross-multiplication at the given points.
    pub fn agrees_with(&self, other: &RationalReconstruction, pts: &[Vec<ExactScalar>]) -> bool {
        pts.iter().all(|p| match (self.eval(p), other.eval(p)) {
            (Ok(a), Ok(b)) => a == b,
            _ => true,
        })
    }
}

fn fit(samples: &[(Vec<ExactScalar>, ExactScalar)], holdout: usize, poles: &[(Locus, u32)], max_degree: u32) -> Option<RationalReconstruction> {
    let vars = samples.first()?.0.len();
    let (train, check) = samples.split_at(samples.len() - holdout);
    for degree in 0..=max_degree {
        let basis = monomials(vars, degree);
        if basis.len() > train.len() {
            return None;
        }
        let a: Matrix = train.iter().map(|(p, _)| basis.iter().map(|m| monomial_value(m, p)).collect()).collect();
        let b: Matrix = train.iter().map(|(p, v)| vec![v * &denominator(poles, p)]).collect();
        let Ok(sol) = solve(&a, &b) else {
            continue;
        };
        let numerator: BTreeMap<Monomial, ExactScalar> = basis
            .into_iter()
            .zip(sol.columns[0].iter().cloned())
            .filter(|(_, c)| !c.is_zero())
            .collect();
        let rec = RationalReconstruction { vars, numerator, poles: poles.to_vec() };
        if check.iter().all(|(p, v)| rec.eval(p).is_ok_and(|x| x == *v)) {
            return Some(rec);
        }
    }
    None
}

/// Fits `P/Q` with `Q` drawn from the ansatz, then lowers pole orders while the
/// samples still admit a fit. The last `holdout` samples only validate.
pub fn reconstruct_rational(samples: &[(Vec<ExactScalar>, ExactScalar)], ansatz: &PoleAnsatz, holdout: usize) -> Result<RationalReconstruction> {
    if samples.len() <= holdout {
        return Err(VoxError::InconsistentSamples("no training samples".into()));
    }
    let mut poles = ansatz.poles.clone();
    let mut best = fit(samples, holdout, &poles, ansatz.max_numerator_degree)
        .ok_or_else(|| VoxError::InconsistentSamples("no rational function of the ansatz fits".into()))?;
    loop {
        let mut improved = false;
        for k in 0..poles.len() {
            if poles[k].1 == 0 {
                continue;
            }
            let mut trial = poles.clone();
            trial[k].1 -= 1;
            let degree = best.numerator_degree();
            if let Some(rec) = fit(samples, holdout, &trial, degree) {
                poles = trial;
                best = rec;
                improved = true;
            }
        }
        if !improved {
            break;
        }
    }
    best.poles.retain(|p| p.1 > 0);
    Ok(best)
}

/// `P(t) / ∏ (t − p_k)^{o_k}` in one variable with known pole locations.
#[derive(Clone, Debug, PartialEq)]
pub struct UnivariateRational {
    pub numerator: Vec<ExactScalar>,
    pub poles: Vec<(ExactScalar, u32)>,
}

fn horner(c: &[ExactScalar], t: &ExactScalar) -> ExactScalar {
    c.iter().rev().fold(ExactScalar::zero(), |acc, x| acc * t + x)
}

impl UnivariateRational {
    /// Interpolates the numerator at the lowest degree that reproduces the held-out samples.
    pub fn fit(samples: &[(ExactScalar, ExactScalar)], poles: Vec<(ExactScalar, u32)>, holdout: usize) -> Result<Self> {
        if samples.len() <= holdout {
            return Err(VoxError::InconsistentSamples("no training samples".into()));
        }
        let (train, check) = samples.split_at(samples.len() - holdout);
        for degree in 0..train.len() {
            let a: Matrix = train.iter().map(|(t, _)| (0..=degree).map(|e| t.powi(e as i64)).collect()).collect();
            let den = |t: &ExactScalar| poles.iter().fold(ExactScalar::one(), |acc, (p, o)| acc * (t - p).powi(*o as i64));
            let b: Matrix = train.iter().map(|(t, v)| vec![v * &den(t)]).collect();
            let Ok(sol) = solve(&a, &b) else {
                continue;
            };
            let rec = UnivariateRational { numerator: sol.columns[0].clone(), poles: poles.clone() };
            if check.iter().all(|(t, v)| rec.eval(t).is_ok_and(|x| x == *v)) {
                return Ok(rec);
            }
        }
        Err(VoxError::InconsistentSamples("no univariate fit reproduces the held-out samples".into()))
    }

    pub fn eval(&self, t: &ExactScalar) -> Result<ExactScalar> {
        let den = self.poles.iter().fold(ExactScalar::one(), |acc, (p, o)| acc * (t - p).powi(*o as i64));
        Ok(horner(&self.numerator, t) * den.inv()?)
    }

    /// `R′ = P′/Q − R·Σ o_k/(t − p_k)`.
    pub fn derivative(&self, t: &ExactScalar) -> Result<ExactScalar> {
        let dp: Vec<ExactScalar> =
            self.numerator.iter().enumerate().skip(1).map(|(k, c)| c * &ExactScalar::from_int(k as i64)).collect();
        let den = self.poles.iter().fold(ExactScalar::one(), |acc, (p, o)| acc * (t - p).powi(*o as i64));
        let mut log_der = ExactScalar::zero();
        for (p, o) in &self.poles {
            log_der += ExactScalar::from_int(*o as i64) * (t - p).inv()?;
        }
        Ok(horner(&dp, t) * den.inv()? - self.eval(t)? * log_der)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(p: i64, q: i64) -> ExactScalar {
        ExactScalar::ratio(p, q)
    }

    fn sample_pairs(f: impl Fn(&ExactScalar, &ExactScalar) -> ExactScalar, n: usize) -> Vec<(Vec<ExactScalar>, ExactScalar)> {
        (0..n)
            .map(|k| {
                let z1 = r(3 * k as i64 + 7, 2 + k as i64);
                let z2 = r(-(k as i64) - 1, 3 + 2 * k as i64);
                let v = f(&z1, &z2);
                (vec![z1, z2], v)
            })
            .collect()
    }

    #[test]
    fn two_point_pole() {
        let s = sample_pairs(|a, b| (a - b).powi(-2), 8);
        let rec = reconstruct_rational(&s, &PoleAnsatz::coincidences(2, 2, false), 2).unwrap();
        assert_eq!(rec.pole_order(Locus { i: 0, j: Some(1) }), 2);
        assert_eq!(rec.numerator, BTreeMap::from([(vec![0, 0], ExactScalar::one())]));
    }

    #[test]
    fn constant_and_simple_pole() {
        let s = sample_pairs(|_, _| r(5, 3), 10);
        let rec = reconstruct_rational(&s, &PoleAnsatz::coincidences(2, 2, false), 2).unwrap();
        assert!(rec.poles.is_empty());
        let s = sample_pairs(|a, b| a * &(a - b).inv().unwrap(), 10);
        let rec = reconstruct_rational(&s, &PoleAnsatz::coincidences(2, 2, false), 2).unwrap();
        assert_eq!(rec.pole_order(Locus { i: 0, j: Some(1) }), 1);
        assert_eq!(rec.numerator, BTreeMap::from([(vec![1, 0], ExactScalar::one())]));
    }

    #[test]
    fn inconsistent_ansatz() {
        // a pole at the origin is not admitted
        let s = sample_pairs(|a, _| a.inv().unwrap(), 12);
        let e = reconstruct_rational(&s, &PoleAnsatz::coincidences(2, 1, false), 3);
        assert!(matches!(e, Err(VoxError::InconsistentSamples(_))));
    }

    #[test]
    fn univariate_derivative() {
        // f(t) = 1/(t − 1)², f′(2) = −2
        let s: Vec<_> = (0..6).map(|k| {
            let t = r(2 * k + 3, 2);
            let v = (&t - &r(1, 1)).powi(-2);
            (t, v)
        }).collect();
        let f = UnivariateRational::fit(&s, vec![(r(1, 1), 2)], 2).unwrap();
        assert_eq!(f.derivative(&r(2, 1)).unwrap(), r(-2, 1));
    }
}
