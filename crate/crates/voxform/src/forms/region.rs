//! Checkable convergence regions over concrete points.

use std::cmp::Ordering;
use std::fmt;

use crate::scalars::{ApproxScalar, ExactScalar, Precision};

/// `z_a − z_b`, or `z_a` when `b` is absent. Indices refer to the point list
/// handed to [`RegionSpec::holds`] (slot points first, then any centres).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Gap {
    pub a: usize,
    pub b: Option<usize>,
}

impl Gap {
    pub fn to_origin(a: usize) -> Self {
        Gap { a, b: None }
    }

    pub fn between(a: usize, b: usize) -> Self {
        Gap { a, b: Some(b) }
    }

    fn value(&self, pts: &[ExactScalar]) -> ExactScalar {
        match self.b {
            None => pts[self.a].clone(),
            Some(b) => &pts[self.a] - &pts[b],
        }
    }
}

impl fmt::Display for Gap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.b {
            None => write!(f, "|p{}|", self.a),
            Some(b) => write!(f, "|p{}-p{}|", self.a, b),
        }
    }
}

/// `Σ |lhs| < |rhs|`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constraint {
    pub lhs: Vec<Gap>,
    pub rhs: Gap,
}

impl Constraint {
    pub fn holds(&self, pts: &[ExactScalar], prec: Precision) -> bool {
        let rhs = self.rhs.value(pts);
        match self.lhs.as_slice() {
            [] => !rhs.is_zero(),
            [single] => single.value(pts).norm_sqr() < rhs.norm_sqr(),
            many => {
                let sum = many.iter().fold(ApproxScalar::zero(prec), |acc, g| {
                    acc.add(&ApproxScalar::from_exact(&g.value(pts), prec).abs())
                });
                sum.cmp_re(&ApproxScalar::from_exact(&rhs, prec).abs()) == Ordering::Less
            }
        }
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.lhs.is_empty() {
            return write!(f, "0 < {}", self.rhs);
        }
        let parts: Vec<String> = self.lhs.iter().map(Gap::to_string).collect();
        write!(f, "{} < {}", parts.join(" + "), self.rhs)
    }
}

/// A conjunction of constraints.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RegionSpec {
    pub constraints: Vec<Constraint>,
}

impl RegionSpec {
    pub fn unrestricted() -> Self {
        RegionSpec::default()
    }

    /// `|p₀| > |p₁| > … > |p_{n−1}| > 0`.
    pub fn radial(n: usize) -> Self {
        let mut constraints: Vec<Constraint> =
            (1..n).map(|i| Constraint { lhs: vec![Gap::to_origin(i)], rhs: Gap::to_origin(i - 1) }).collect();
        if n > 0 {
            constraints.push(Constraint { lhs: vec![], rhs: Gap::to_origin(n - 1) });
        }
        RegionSpec { constraints }
    }

    pub fn and(mut self, c: Constraint) -> Self {
        self.constraints.push(c);
        self
    }

    pub fn violations(&self, pts: &[ExactScalar], prec: Precision) -> Vec<String> {
        self.constraints.iter().filter(|c| !c.holds(pts, prec)).map(Constraint::to_string).collect()
    }

    pub fn holds(&self, pts: &[ExactScalar], prec: Precision) -> bool {
        self.violations(pts, prec).is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(v: &[(i64, i64)]) -> Vec<ExactScalar> {
        v.iter().map(|&(p, q)| ExactScalar::ratio(p, q)).collect()
    }

    #[test]
    fn radial_region() {
        let reg = RegionSpec::radial(3);
        assert!(reg.holds(&pts(&[(3, 1), (2, 1), (1, 1)]), Precision(64)));
        assert_eq!(reg.violations(&pts(&[(3, 1), (-3, 1), (1, 1)]), Precision(64)).len(), 1);
        assert!(!reg.holds(&pts(&[(3, 1), (2, 1), (0, 1)]), Precision(64)));
    }

    #[test]
    fn separated_discs() {
        // |p0 − p2| + |p1 − p3| < |p2 − p3|: points p0,p1 near centres p2,p3
        let c = Constraint { lhs: vec![Gap::between(0, 2), Gap::between(1, 3)], rhs: Gap::between(2, 3) };
        assert!(c.holds(&pts(&[(17, 4), (5, 4), (4, 1), (1, 1)]), Precision(64)));
        assert!(!c.holds(&pts(&[(6, 1), (-1, 1), (4, 1), (1, 1)]), Precision(64)));
        assert_eq!(c.to_string(), "|p0-p2| + |p1-p3| < |p2-p3|");
    }
}
