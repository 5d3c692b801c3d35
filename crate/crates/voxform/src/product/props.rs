//! Derivative, scaling, split-independence and pole properties of products.

use num_rational::BigRational;
use num_traits::Signed;

use super::{eval_product, native_eval, EpsProductSpec, FactorVariant, PairingMode, RightChart};
use crate::error::{Result, VoxError};
use crate::forms::{
    reconstruct_rational, scale_by_weight, scale_dual_by_weight, slot_function_with, EvalMode, EvalOptions, FormKind, PoleAnsatz,
    RationalReconstruction, Side, WForm,
};
use crate::report::{Check, Report};
use crate::scalars::linalg::{solve, Matrix};
use crate::scalars::{ApproxScalar, ExactScalar, Precision};
use crate::sewing::SphereConfig;
use crate::voa::{is_vacuum_multiple, virasoro_apply, DualVector, GradedVector};

fn vacuum_tailed(kind: &FormKind) -> bool {
    matches!(kind, FormKind::Correlator { tail } if is_vacuum_multiple(tail))
}

/// Derivative in one slot two ways (fitted rational function against an `L(−1)` insertion),
/// plus the sum over all slots against the translation action on both factors.
pub fn product_partial_derivative(spec: &EpsProductSpec, wprime: &DualVector, slot: usize) -> Report {
    let mut rep = Report::new();
    let id = format!("product.derivative.slot{slot}");
    let anchor = "slot derivative of the product equals the translation-generator insertion";
    let r = (|| -> Result<Check> {
        let form = spec.as_form(RightChart::Native)?;
        let points = spec.native_points();
        if slot >= points.len() {
            return Err(VoxError::InvalidArgument(format!("slot {slot} of {}", points.len())));
        }
        let k = spec.left.arity();
        let wt = form.slots[slot].state.max_weight();
        let (range, puncture) = if slot < k { (0..k, -&spec.cfg.zeta1) } else { (k..points.len(), -&spec.cfg.zeta2) };
        let mut poles: Vec<(ExactScalar, u32)> =
            range.filter(|&j| j != slot).map(|j| (points[j].clone(), wt + form.slots[j].state.max_weight())).collect();
        poles.push((puncture, wt + spec.lmax + 1));
        let own = if slot < k { &spec.left.kind } else { &spec.right.kind };
        if !vacuum_tailed(own) {
            poles.push((ExactScalar::zero(), wt + spec.lmax + 4));
        }
        let f = slot_function_with(&form, wprime, &points, slot, poles)?;
        let fitted = f.derivative(&points[slot])?;
        let inserted = form.with_state(slot, virasoro_apply(-1, &form.slots[slot].state)).value(wprime, &points)?;
        Ok(Check::exact(&id, anchor, &(fitted - inserted)))
    })();
    rep.push_result(&id, anchor, r);

    let id = "product.derivative.sum";
    let anchor = "sum of slot derivatives equals the translation action on both factors";
    if !(vacuum_tailed(&spec.left.kind) && vacuum_tailed(&spec.right.kind)) {
        rep.push(Check::skip(id, anchor, "factors with non-vacuum tails"));
        return rep;
    }
    let r = (|| -> Result<Check> {
        let form = spec.as_form(RightChart::Native)?;
        let points = spec.native_points();
        let mut lhs = ExactScalar::zero();
        for i in 0..points.len() {
            lhs += form.with_state(i, virasoro_apply(-1, &form.slots[i].state)).value(wprime, &points)?;
        }
        let a = native_eval(spec, wprime, &FactorVariant::Translation(Side::Left), EvalMode::Exact)?;
        let b = native_eval(spec, wprime, &FactorVariant::Translation(Side::Right), EvalMode::Exact)?;
        Ok(Check::exact(id, anchor, &(lhs - a.value.value - b.value.value)))
    })();
    rep.push_result(id, anchor, r);
    rep
}

/// A rational bound `s ≥ |z|`.
fn modulus_cap(z: &ExactScalar) -> BigRational {
    z.re().abs() + z.im().abs()
}

/// The product conjugated by `z^{L(0)}` against the product of rescaled states, points and
/// sewing coordinates (`ζ′ = zζ`, `ε′ = z²ε`) with the pairing parameter held fixed.
pub fn product_l0_conjugation(spec: &EpsProductSpec, wprime: &DualVector, z: &ExactScalar) -> Report {
    let mut rep = Report::new();
    let id = "product.l0_conjugation";
    let anchor = "weight grading conjugates the product to rescaled states, points and sewing data";
    let r = (|| -> Result<Check> {
        if z.is_zero() {
            return Err(VoxError::InvalidArgument("zero scale".into()));
        }
        let lhs = native_eval(spec, &scale_dual_by_weight(wprime, z), &FactorVariant::Plain, EvalMode::Exact)?.value.value;
        let grow = modulus_cap(z).max(BigRational::from_integer(1.into()));
        let cfg = SphereConfig {
            r1: &spec.cfg.r1 * &grow,
            r2: &spec.cfg.r2 * &grow,
            epsilon: &spec.cfg.epsilon * &(z * z),
            zeta1: &spec.cfg.zeta1 * z,
            zeta2: &spec.cfg.zeta2 * z,
            x_points: spec.cfg.x_points.iter().map(|p| p * z).collect(),
            y_points: spec.cfg.y_points.iter().map(|p| p * z).collect(),
        };
        let scaled = |f: &WForm| {
            let mut g = f.clone();
            for s in g.slots.iter_mut() {
                s.state = scale_by_weight(&s.state, z);
            }
            g
        };
        let moved = EpsProductSpec {
            left: scaled(&spec.left),
            right: scaled(&spec.right),
            cfg,
            lmax: spec.lmax,
            pairing: PairingMode::Fixed { lambda_sq: spec.lambda_sq() },
        };
        let rhs = native_eval(&moved, wprime, &FactorVariant::Plain, EvalMode::Exact)?.value.value;
        Ok(Check::exact(id, anchor, &(lhs - rhs)).with_detail(format!("epsilon' = {}", moved.cfg.epsilon)))
    })();
    rep.push_result(id, anchor, r);
    rep
}

/// Products of one slot list split as `k | n−k` for every `k`, evaluated in the left coordinate.
#[derive(Clone, Debug)]
pub struct SplitSetup {
    pub states: Vec<GradedVector>,
    pub points: Vec<ExactScalar>,
    pub cfg: SphereConfig,
    pub lmax: u32,
    pub pairing: PairingMode,
}

impl SplitSetup {
    pub fn spec(&self, k: usize) -> EpsProductSpec {
        let (l, r) = self.states.split_at(k);
        EpsProductSpec {
            left: WForm::correlator(l.to_vec(), GradedVector::vacuum(), self.lmax),
            right: WForm::correlator(r.to_vec(), GradedVector::vacuum(), self.lmax),
            cfg: self.cfg.clone(),
            lmax: self.lmax,
            pairing: self.pairing.clone(),
        }
    }
}

/// Split independence: all splits agree within their combined tails; a repeated split is identical.
pub fn partition_independence(setup: &SplitSetup, wprime: &DualVector) -> Report {
    let mut rep = Report::new();
    let prec = Precision::from_env();
    let n = setup.states.len();
    let anchor = "the product does not depend on how the slot list is split";
    let eval_split = |k: usize| -> Result<crate::forms::Estimate> {
        setup.spec(k).as_form(RightChart::Sewn)?.eval(wprime, &setup.points, EvalMode::Series)
    };
    let values: Vec<Result<crate::forms::Estimate>> = (0..=n).map(eval_split).collect();
    for k in 1..=n {
        let id = format!("partition.split{k}_vs_split0");
        match (&values[k], &values[0]) {
            (Ok(a), Ok(b)) => {
                let res = ApproxScalar::from_exact(&(&a.value - &b.value), prec).abs();
                rep.push(Check::bounded(&id, anchor, &res, &a.bound.add(&b.bound)));
            }
            (Err(e), _) | (_, Err(e)) => rep.push(Check::error(&id, anchor, e)),
        }
    }
    let again = eval_split(n.min(1));
    let same = matches!((&again, &values[n.min(1)]), (Ok(a), Ok(b)) if a.value == b.value && a.bound.decimal_string() == b.bound.decimal_string());
    rep.push(Check::predicate("partition.repeat", "repeating a split reproduces the value bit for bit", same));
    rep
}

/// `Σ_{l≥0} T_l` for level terms obeying a detected linear recurrence, summed through the
/// rational generating function at 1. The recurrence must hold on `holdout` further levels.
pub fn resum_levels(terms: &[ExactScalar], holdout: usize) -> Result<ExactScalar> {
    let n = terms.len();
    for d in 0..=(n.saturating_sub(holdout)) / 2 {
        if d == 0 {
            if terms.iter().all(ExactScalar::is_zero) {
                return Ok(ExactScalar::zero());
            }
            continue;
        }
        let a: Matrix = (d..2 * d).map(|l| (1..=d).map(|j| terms[l - j].clone()).collect()).collect();
        let b: Matrix = (d..2 * d).map(|l| vec![terms[l].clone()]).collect();
        let Ok(sol) = solve(&a, &b) else { continue };
        let coef = &sol.columns[0];
        let holds = (d..n).all(|l| {
            let pred: ExactScalar = (1..=d).map(|j| &coef[j - 1] * &terms[l - j]).sum();
            pred == terms[l]
        });
        if !holds {
            continue;
        }
        // G(s) = N(s)/Q(s), Q = 1 − Σ a_j s^j, N = Q·Σ_{l<d} T_l s^l mod s^d
        let q1 = ExactScalar::one() - coef.iter().cloned().sum::<ExactScalar>();
        if q1.is_zero() {
            return Err(VoxError::NonContractive("level series has a pole at unit sewing weight".into()));
        }
        let mut n1 = ExactScalar::zero();
        for m in 0..d {
            let mut c = terms[m].clone();
            for j in 1..=m {
                c = c - &coef[j - 1] * &terms[m - j];
            }
            n1 += c;
        }
        return Ok(n1 * q1.inv()?);
    }
    Err(VoxError::InconsistentSamples("no linear recurrence fits the level terms".into()))
}

/// Reconstruction of the resummed product over a sweep of left-coordinate configurations,
/// with poles admitted only where two slot points coincide.
pub fn pole_structure(spec: &EpsProductSpec, wprime: &DualVector, sweep: &[Vec<ExactScalar>]) -> Result<RationalReconstruction> {
    let form = spec.as_form(RightChart::Sewn)?;
    let FormKind::Product(kind) = &form.kind else { unreachable!("product form") };
    let opts = EvalOptions { level: spec.lmax, mode: EvalMode::Exact, prec: Precision::from_env() };
    let mut samples = Vec::new();
    for pts in sweep {
        let inputs = match form.inputs(pts) {
            Ok(i) => i,
            Err(VoxError::DuplicatePoints) => continue,
            Err(e) => return Err(e),
        };
        let out = match eval_product(kind, &opts, wprime, &[], &inputs) {
            Ok(o) => o,
            Err(VoxError::OutOfRegion(_) | VoxError::DuplicatePoints | VoxError::PoleAtOrigin) => continue,
            Err(e) => return Err(e),
        };
        samples.push((pts.clone(), resum_levels(out.terms.levels(), 3)?));
    }
    let cap = 2 * form.slots.iter().map(|s| s.state.max_weight()).max().unwrap_or(0);
    reconstruct_rational(&samples, &PoleAnsatz::coincidences(form.arity(), cap, false), 3)
}

#[cfg(test)]
mod tests {
    use super::super::tests::generator_spec;
    use super::*;
    use crate::forms::{sample_configurations, Locus};
    use num_traits::One;

    fn r(p: i64, q: i64) -> ExactScalar {
        ExactScalar::ratio(p, q)
    }

    #[test]
    fn derivative_two_ways() {
        let spec = generator_spec(8);
        for slot in 0..2 {
            let rep = product_partial_derivative(&spec, &DualVector::vacuum(), slot);
            assert!(rep.all_pass(), "{rep:?}");
        }
    }

    #[test]
    fn l0_conjugation_of_product() {
        let spec = generator_spec(8);
        assert!(product_l0_conjugation(&spec, &DualVector::vacuum(), &r(2, 1)).all_pass());
        assert!(product_l0_conjugation(&spec, &DualVector::vacuum(), &ExactScalar::one()).all_pass());
    }

    #[test]
    fn splits_agree() {
        let setup = SplitSetup {
            states: vec![GradedVector::generator(), GradedVector::generator()],
            points: vec![r(2, 1), r(1, 4)],
            cfg: SphereConfig::with_partner(BigRational::one(), BigRational::one(), r(1, 16), r(1, 4)).unwrap(),
            lmax: 12,
            pairing: PairingMode::default_xi(),
        };
        let rep = partition_independence(&setup, &DualVector::vacuum());
        assert!(rep.all_pass(), "{rep:?}");
    }

    #[test]
    fn resummation_of_geometric_levels() {
        // Σ (l+1) 2^{−l} = 4
        let terms: Vec<_> = (0..10).map(|l| ExactScalar::from_int(l + 1) * r(1, 2).powi(l)).collect();
        assert_eq!(resum_levels(&terms, 3).unwrap(), r(4, 1));
        assert!(resum_levels(&[r(1, 1), r(2, 1), r(7, 1), r(1, 3)], 2).is_err());
    }

    #[test]
    fn coincidence_pole_emerges() {
        let spec = generator_spec(12);
        let sweep: Vec<Vec<ExactScalar>> = sample_configurations(2, 14, 3);
        let rec = pole_structure(&spec, &DualVector::vacuum(), &sweep).unwrap();
        assert_eq!(rec.pole_order(Locus { i: 0, j: Some(1) }), 2);
    }
}
