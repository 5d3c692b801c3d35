//! Forms with slot states, differential tags and a convergence region.

use super::estimate::Estimate;
use super::eval::{eval, EvalMode, EvalOptions, FormKind};
use super::input::SlotInput;
use super::region::RegionSpec;
use crate::error::{Result, VoxError};
use crate::scalars::{ExactScalar, Precision};
use crate::voa::{DualVector, GradedVector};

/// A slot state with its differential weight `dz^{wt}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Slot {
    pub state: GradedVector,
    pub wt_tag: u32,
}

impl Slot {
    /// Tags homogeneous states with their weight (the top weight otherwise).
    pub fn new(state: GradedVector) -> Self {
        let wt_tag = state.homogeneous_weight().unwrap_or_else(|| state.max_weight());
        Slot { state, wt_tag }
    }
}

/// An `n`-point form: evaluator kind, slot states, level cutoff and region.
#[derive(Clone, Debug)]
pub struct WForm {
    pub kind: FormKind,
    pub slots: Vec<Slot>,
    pub level: u32,
    pub region: RegionSpec,
}

impl WForm {
    pub fn new(kind: FormKind, states: Vec<GradedVector>, level: u32) -> Self {
        WForm { kind, slots: states.into_iter().map(Slot::new).collect(), level, region: RegionSpec::unrestricted() }
    }

    /// `⟨w′, Y(v₁,z₁)…Y(vₙ,zₙ) w⟩` as a form in the `z_i`.
    pub fn correlator(states: Vec<GradedVector>, tail: GradedVector, level: u32) -> Self {
        WForm::new(FormKind::correlator(tail), states, level)
    }

    pub fn with_region(mut self, region: RegionSpec) -> Self {
        self.region = region;
        self
    }

    pub fn arity(&self) -> usize {
        self.slots.len()
    }

    pub fn states(&self) -> Vec<GradedVector> {
        self.slots.iter().map(|s| s.state.clone()).collect()
    }

    /// Tail state when the kind is a plain correlator.
    pub fn tail(&self) -> Option<&GradedVector> {
        match &self.kind {
            FormKind::Correlator { tail } => Some(tail),
            _ => None,
        }
    }

    /// The same form with one slot state replaced.
    pub fn with_state(&self, i: usize, state: GradedVector) -> WForm {
        let mut out = self.clone();
        out.slots[i] = Slot::new(state);
        out
    }

    /// Slot inputs at the given points; checks distinctness and the region.
    pub fn inputs(&self, points: &[ExactScalar]) -> Result<Vec<SlotInput>> {
        if points.len() != self.arity() {
            return Err(VoxError::InvalidArgument(format!("{} points for a {}-point form", points.len(), self.arity())));
        }
        for (i, z) in points.iter().enumerate() {
            if points[..i].contains(z) {
                return Err(VoxError::DuplicatePoints);
            }
        }
        let violated = self.region.violations(points, Precision::from_env());
        if !violated.is_empty() {
            return Err(VoxError::OutOfRegion(violated.join(", ")));
        }
        Ok(self.slots.iter().zip(points).map(|(s, z)| SlotInput::plain(s.state.clone(), z.clone())).collect())
    }

    pub fn options(&self, mode: EvalMode) -> EvalOptions {
        EvalOptions { level: self.level, mode, prec: Precision::from_env() }
    }

    pub fn eval(&self, wprime: &DualVector, points: &[ExactScalar], mode: EvalMode) -> Result<Estimate> {
        eval(&self.kind, &self.options(mode), wprime, &[], &self.inputs(points)?)
    }

    /// Exact value; fails unless every piece resums exactly.
    pub fn value(&self, wprime: &DualVector, points: &[ExactScalar]) -> Result<ExactScalar> {
        Ok(self.eval(wprime, points, EvalMode::Exact)?.value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tags_and_points() {
        let f = WForm::correlator(vec![GradedVector::generator(), GradedVector::conformal()], GradedVector::vacuum(), 8);
        assert_eq!(f.slots[0].wt_tag, 1);
        assert_eq!(f.slots[1].wt_tag, 2);
        let z = ExactScalar::from_int(2);
        assert_eq!(f.inputs(&[z.clone(), z]), Err(VoxError::DuplicatePoints));
        let g = f.clone().with_region(RegionSpec::radial(2));
        assert!(matches!(g.inputs(&[ExactScalar::from_int(1), ExactScalar::from_int(2)]), Err(VoxError::OutOfRegion(_))));
    }
}
