//! Check results and their machine-readable report.

use serde::Serialize;

use crate::error::VoxError;
use crate::scalars::{ApproxScalar, ExactScalar, Precision};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skip,
}

/// One verified identity or certificate. `pass ⟺ residual ≤ bound`.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub id: String,
    pub anchor: String,
    pub status: Status,
    pub residual: String,
    pub bound: String,
    pub detail: String,
}

fn modulus(x: &ExactScalar) -> ApproxScalar {
    ApproxScalar::from_exact(x, Precision::from_env()).abs()
}

impl Check {
    /// An identity expected to hold exactly.
    pub fn exact(id: &str, anchor: &str, residual: &ExactScalar) -> Check {
        Check::bounded(id, anchor, &modulus(residual), &ApproxScalar::zero(Precision::from_env()))
    }

    /// `residual ≤ bound` for non-negative reals.
    pub fn bounded(id: &str, anchor: &str, residual: &ApproxScalar, bound: &ApproxScalar) -> Check {
        let ok = residual.abs().cmp_re(&bound.abs()) != std::cmp::Ordering::Greater;
        Check {
            id: id.to_string(),
            anchor: anchor.to_string(),
            status: if ok { Status::Pass } else { Status::Fail },
            residual: residual.abs().sci_string(),
            bound: bound.abs().sci_string(),
            detail: String::new(),
        }
    }

    /// A boolean predicate.
    pub fn predicate(id: &str, anchor: &str, holds: bool) -> Check {
        Check {
            id: id.to_string(),
            anchor: anchor.to_string(),
            status: if holds { Status::Pass } else { Status::Fail },
            residual: if holds { "0" } else { "1" }.to_string(),
            bound: "0".to_string(),
            detail: String::new(),
        }
    }

    pub fn skip(id: &str, anchor: &str, reason: &str) -> Check {
        Check {
            id: id.to_string(),
            anchor: anchor.to_string(),
            status: Status::Skip,
            residual: "0".to_string(),
            bound: "0".to_string(),
            detail: reason.to_string(),
        }
    }

    /// A check that could not be evaluated.
    pub fn error(id: &str, anchor: &str, err: &VoxError) -> Check {
        Check {
            id: id.to_string(),
            anchor: anchor.to_string(),
            status: Status::Fail,
            residual: "nan".to_string(),
            bound: "0".to_string(),
            detail: err.to_string(),
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Check {
        self.detail = detail.into();
        self
    }

    pub fn passed(&self) -> bool {
        self.status != Status::Fail
    }
}

/// An ordered collection of checks.
#[derive(Clone, Debug, Default, Serialize)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn new() -> Self {
        Report::default()
    }

    pub fn push(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn extend(&mut self, other: Report) {
        self.checks.extend(other.checks);
    }

    /// Records `Ok` checks or converts an error into a failing entry.
    pub fn push_result(&mut self, id: &str, anchor: &str, r: crate::error::Result<Check>) {
        match r {
            Ok(c) => self.push(c),
            Err(e) => self.push(Check::error(id, anchor, &e)),
        }
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed()).collect()
    }

    pub fn get(&self, id: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.id == id)
    }

    pub fn sort_by_id(&mut self) {
        self.checks.sort_by(|a, b| a.id.cmp(&b.id));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn statuses() {
        assert!(Check::exact("a", "x", &ExactScalar::zero()).passed());
        assert!(!Check::exact("a", "x", &ExactScalar::ratio(1, 3)).passed());
        let p = Precision(64);
        let c = Check::bounded("b", "x", &ApproxScalar::from_int(1, p), &ApproxScalar::from_int(2, p));
        assert_eq!(c.status, Status::Pass);
        assert!(Check::skip("c", "x", "n/a").passed());
    }
}
