//! Evaluation of form kinds on slot inputs.

use std::cmp::Ordering;

use super::estimate::Estimate;
use super::input::{translate_dual, SlotInput};
use crate::error::{Result, VoxError};
use crate::product::{eval_product, ProductSpec};
use crate::scalars::{ApproxScalar, ExactScalar, Precision};
use crate::voa::{correlator_exact, correlator_series, is_vacuum_multiple, DualVector, GradedVector, LevelSeries};

/// Which factor of a product an outer insertion acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// A vertex operator applied on the module side, `⟨w′, Y_W(v, z) F(…)⟩`.
#[derive(Clone, Debug)]
pub struct Outer {
    pub input: SlotInput,
    pub side: Side,
}

impl Outer {
    pub fn new(input: SlotInput, side: Side) -> Self {
        Outer { input, side }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EvalMode {
    /// Grouped inputs are replaced by their constituents and every correlator
    /// is resummed to its exact rational value.
    Exact,
    /// Grouped inputs are expanded level by level and certified.
    Series,
}

#[derive(Clone, Copy, Debug)]
pub struct EvalOptions {
    pub level: u32,
    pub mode: EvalMode,
    pub prec: Precision,
}

impl EvalOptions {
    pub fn exact(level: u32) -> Self {
        EvalOptions { level, mode: EvalMode::Exact, prec: Precision::from_env() }
    }

    pub fn series(level: u32) -> Self {
        EvalOptions { level, mode: EvalMode::Series, prec: Precision::from_env() }
    }
}

/// How a form produces its value from inputs.
#[derive(Clone, Debug)]
pub enum FormKind {
    /// `⟨w′, Y(v₁,z₁)…Y(vₙ,zₙ) w⟩` with tail `w`.
    Correlator { tail: GradedVector },
    /// The coboundary of the inner form; takes one more input.
    Coboundary(Box<FormKind>),
    /// The ε-product of two forms.
    Product(Box<ProductSpec>),
    /// `F_σ(x₁,…,xₙ) = F(x_{σ(1)},…,x_{σ(n)})`.
    Permuted { sigma: Vec<usize>, inner: Box<FormKind> },
    /// A linear combination of forms of equal arity.
    Combination(Vec<(ExactScalar, FormKind)>),
}

impl FormKind {
    pub fn correlator(tail: GradedVector) -> Self {
        FormKind::Correlator { tail }
    }

    pub fn vacuum_correlator() -> Self {
        FormKind::Correlator { tail: GradedVector::vacuum() }
    }

    pub fn coboundary(self) -> Self {
        FormKind::Coboundary(Box::new(self))
    }

    pub fn permuted(self, sigma: Vec<usize>) -> Self {
        FormKind::Permuted { sigma, inner: Box::new(self) }
    }

    /// Number of extra inputs consumed relative to the innermost forms.
    pub fn arity_shift(&self) -> usize {
        match self {
            FormKind::Coboundary(inner) => 1 + inner.arity_shift(),
            FormKind::Permuted { inner, .. } => inner.arity_shift(),
            _ => 0,
        }
    }
}

/// Fixed frame origins tried when a flattened correlator has tied moduli.
fn fallback_shifts() -> Vec<ExactScalar> {
    vec![
        ExactScalar::ratio(1, 7),
        ExactScalar::ratio(-2, 9),
        ExactScalar::gaussian(0, 1, 1, 5),
        ExactScalar::gaussian(3, 11, -2, 13),
    ]
}

/// Exact value of a correlator whose insertions are plain states.
pub fn exact_correlator(wprime: &DualVector, leaves: &[(GradedVector, ExactScalar)], tail: &GradedVector) -> Result<ExactScalar> {
    match correlator_exact(wprime, leaves, tail) {
        Err(e @ (VoxError::OutOfRegion(_) | VoxError::PoleAtOrigin)) if is_vacuum_multiple(tail) => {
            for c in fallback_shifts() {
                let moved: Vec<_> = leaves.iter().map(|(v, z)| (v.clone(), z - &c)).collect();
                if let Ok(x) = correlator_exact(&translate_dual(wprime, &c), &moved, tail) {
                    return Ok(x);
                }
            }
            Err(e)
        }
        other => other,
    }
}

fn separated(outer: &SlotInput, inner: &SlotInput, prec: Precision) -> bool {
    let a = ApproxScalar::from_exact(outer.point(), prec).abs().sub(&outer.spread(prec));
    let b = ApproxScalar::from_exact(inner.point(), prec).abs().add(&inner.spread(prec));
    a.cmp_re(&b) == Ordering::Greater
}

/// Radially ordered insertions if the nested discs separate in this frame.
fn frame_order(inputs: &[SlotInput], vacuum_tail: bool, prec: Precision) -> Option<Vec<SlotInput>> {
    let mut sorted = inputs.to_vec();
    sorted.sort_by(|a, b| b.point().norm_sqr().cmp(&a.point().norm_sqr()));
    for w in sorted.windows(2) {
        if !separated(&w[0], &w[1], prec) {
            return None;
        }
    }
    if let Some(last) = sorted.last() {
        let at_origin = last.point().is_zero();
        if at_origin && !vacuum_tail {
            return None;
        }
        if !at_origin {
            let r = ApproxScalar::from_exact(last.point(), prec).abs();
            if r.cmp_re(&last.spread(prec)) != Ordering::Greater {
                return None;
            }
        }
    }
    Some(sorted)
}

/// Level series of a correlator with possibly grouped insertions.
///
/// The frame origin is moved to a group centre or an insertion point when
/// that separates the insertions and the tail is the vacuum.
pub fn series_correlator(
    wprime: &DualVector,
    tail: &GradedVector,
    inputs: &[SlotInput],
    level: u32,
    prec: Precision,
) -> Result<LevelSeries> {
    let vacuum_tail = is_vacuum_multiple(tail);
    let mut frames = vec![ExactScalar::zero()];
    if vacuum_tail {
        frames.extend(inputs.iter().filter(|i| !i.is_plain()).map(|i| i.point().clone()));
        frames.extend(inputs.iter().filter(|i| i.is_plain()).map(|i| i.point().clone()));
    }
    for c in frames {
        let moved: Vec<SlotInput> = inputs.iter().map(|i| i.shifted(&c)).collect();
        let Some(order) = frame_order(&moved, vacuum_tail, prec) else {
            continue;
        };
        let ins = order.iter().map(|i| i.to_insertion(level, prec)).collect::<Result<Vec<_>>>()?;
        return correlator_series(&translate_dual(wprime, &c), &ins, tail, level);
    }
    Err(VoxError::OutOfRegion("no frame separates the grouped insertions".into()))
}

/// Partial sum and certified tail of a level series.
pub fn certified(series: &LevelSeries, prec: Precision) -> Result<Estimate> {
    let cert = series.certify(prec)?;
    Ok(Estimate { value: series.partial_sum(), bound: cert.tail })
}

fn eval_correlator(
    tail: &GradedVector,
    opts: &EvalOptions,
    wprime: &DualVector,
    outer: &[Outer],
    inputs: &[SlotInput],
) -> Result<Estimate> {
    let all: Vec<SlotInput> = outer.iter().map(|o| o.input.clone()).chain(inputs.iter().cloned()).collect();
    if opts.mode == EvalMode::Exact || all.iter().all(SlotInput::is_plain) {
        let leaves: Vec<_> = all.iter().flat_map(SlotInput::leaves).collect();
        return Ok(Estimate::exact(exact_correlator(wprime, &leaves, tail)?, opts.prec));
    }
    certified(&series_correlator(wprime, tail, &all, opts.level, opts.prec)?, opts.prec)
}

fn eval_coboundary(
    inner: &FormKind,
    opts: &EvalOptions,
    wprime: &DualVector,
    outer: &[Outer],
    inputs: &[SlotInput],
) -> Result<Estimate> {
    let Some((first, rest)) = inputs.split_first() else {
        return Err(VoxError::InvalidArgument("a coboundary needs at least one input".into()));
    };
    let n = inputs.len() - 1;
    let mut with_first = outer.to_vec();
    with_first.push(Outer::new(first.clone(), Side::Left));
    let mut acc = eval(inner, opts, wprime, &with_first, rest)?;
    for i in 0..n {
        let mut merged: Vec<SlotInput> = inputs[..i].to_vec();
        merged.push(SlotInput::merge(inputs[i].clone(), inputs[i + 1].clone()));
        merged.extend_from_slice(&inputs[i + 2..]);
        let term = eval(inner, opts, wprime, outer, &merged)?;
        acc = if i % 2 == 0 { acc.sub(&term) } else { acc.add(&term) };
    }
    let mut with_last = outer.to_vec();
    with_last.push(Outer::new(inputs[n].clone(), Side::Right));
    let term = eval(inner, opts, wprime, &with_last, &inputs[..n])?;
    Ok(if n % 2 == 0 { acc.sub(&term) } else { acc.add(&term) })
}

/// `⟨w′, Y_W(outer…) F(inputs)⟩` for the given form kind.
pub fn eval(kind: &FormKind, opts: &EvalOptions, wprime: &DualVector, outer: &[Outer], inputs: &[SlotInput]) -> Result<Estimate> {
    match kind {
        FormKind::Correlator { tail } => eval_correlator(tail, opts, wprime, outer, inputs),
        FormKind::Coboundary(inner) => eval_coboundary(inner, opts, wprime, outer, inputs),
        FormKind::Product(spec) => eval_product(spec, opts, wprime, outer, inputs).map(|p| p.value),
        FormKind::Permuted { sigma, inner } => {
            if sigma.len() != inputs.len() {
                return Err(VoxError::InvalidArgument(format!("permutation of {} acting on {} inputs", sigma.len(), inputs.len())));
            }
            let moved: Vec<SlotInput> = sigma.iter().map(|&s| inputs[s].clone()).collect();
            eval(inner, opts, wprime, outer, &moved)
        }
        FormKind::Combination(terms) => {
            let mut acc = Estimate::zero(opts.prec);
            for (k, f) in terms {
                acc = acc.add(&eval(f, opts, wprime, outer, inputs)?.scale(k));
            }
            Ok(acc)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(p: i64, q: i64) -> ExactScalar {
        ExactScalar::ratio(p, q)
    }

    fn a_at(z: ExactScalar) -> SlotInput {
        SlotInput::plain(GradedVector::generator(), z)
    }

    fn wick2(z: &ExactScalar, w: &ExactScalar) -> ExactScalar {
        (z - w).powi(-2)
    }

    #[test]
    fn grouped_series_matches_flat() {
        // two one-member groups about 4 and 1, offsets 1/4
        let g1 = SlotInput::group(vec![a_at(r(17, 4))], r(4, 1));
        let g2 = SlotInput::group(vec![a_at(r(5, 4))], r(1, 1));
        let s = series_correlator(&DualVector::vacuum(), &GradedVector::vacuum(), &[g1, g2], 30, Precision(128)).unwrap();
        let est = certified(&s, Precision(128)).unwrap();
        let exact = wick2(&r(17, 4), &r(5, 4));
        let err = ApproxScalar::from_exact(&(&est.value - &exact), Precision(128)).abs();
        assert!(err.cmp_re(&est.bound) != Ordering::Greater);
        assert!(est.bound.to_f64() < 1e-6);
    }

    #[test]
    fn frame_at_group_centre() {
        // group of (a at 4, a at 2) about 1 with the third point at −3: only the centred frame separates
        let g = SlotInput::group(vec![a_at(r(4, 1)), a_at(r(2, 1))], r(1, 1));
        let s = series_correlator(&DualVector::vacuum(), &GradedVector::vacuum(), &[g.clone()], 4, Precision(64));
        assert!(s.is_ok());
        let out = series_correlator(&DualVector::vacuum(), &GradedVector::generator(), &[g], 4, Precision(64));
        assert!(matches!(out, Err(VoxError::OutOfRegion(_))));
    }

    #[test]
    fn coboundary_of_one_point_is_two_point() {
        // δE⁽¹⁾ = E⁽²⁾ for vacuum-tailed correlators
        let f = FormKind::vacuum_correlator().coboundary();
        let inputs = [a_at(r(3, 1)), a_at(r(1, 1))];
        let v = eval(&f, &EvalOptions::exact(12), &DualVector::vacuum(), &[], &inputs).unwrap();
        assert_eq!(v.value, wick2(&r(3, 1), &r(1, 1)));
        let g = FormKind::vacuum_correlator().coboundary().coboundary();
        let three = [a_at(r(5, 1)), a_at(r(9, 2)), a_at(r(1, 1))];
        let wa = DualVector::coordinate(crate::voa::PartitionState::new(vec![1]));
        let one = eval(&FormKind::vacuum_correlator(), &EvalOptions::exact(12), &wa, &[], &three).unwrap();
        assert!(!one.value.is_zero());
        let v = eval(&g, &EvalOptions::exact(12), &wa, &[], &three).unwrap();
        assert!(v.value.is_zero());
    }

    #[test]
    fn permuted_and_combination() {
        let f = FormKind::vacuum_correlator();
        let inputs = [a_at(r(3, 1)), SlotInput::plain(GradedVector::conformal(), r(1, 1))];
        let o = EvalOptions::exact(10);
        let w = DualVector::vacuum();
        let base = eval(&f, &o, &w, &[], &inputs).unwrap().value;
        let swapped = eval(&f.clone().permuted(vec![1, 0]), &o, &w, &[], &inputs).unwrap().value;
        assert_eq!(base, swapped);
        let c = FormKind::Combination(vec![(r(2, 1), f.clone()), (r(-1, 1), f)]);
        assert_eq!(eval(&c, &o, &w, &[], &inputs).unwrap().value, base);
    }
}
