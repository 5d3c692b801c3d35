//! Exact checks of the vertex algebra axioms on low-weight basis states.

use std::collections::BTreeMap;

use super::context::{mode_apply, virasoro_apply, VOAContext};
use super::correlator::correlator_exact;
use super::state::{DualVector, GradedVector, PartitionState};
use crate::forms::{lminus1_transpose, reconstruct_rational, Locus, PoleAnsatz};
use crate::report::{Check, Report};
use crate::scalars::ExactScalar;

/// Options for [`check_axioms`].
#[derive(Clone, Debug)]
pub struct AxiomOptions {
    /// Largest basis weight used for `v`, `u` and `w′`.
    pub max_weight: u32,
    /// Highest `ζ` order compared in the translation identity.
    pub translation_order: u32,
    /// Scale factor for the conjugation identity.
    pub scale: ExactScalar,
    /// Deliberately wrong eigenvalue in the `L(0)` bracket, for fault injection.
    pub corrupt_bracket: bool,
}

impl AxiomOptions {
    pub fn for_context(ctx: &VOAContext) -> Self {
        AxiomOptions { max_weight: ctx.cutoff().min(4), translation_order: 3, scale: ExactScalar::from_int(2), corrupt_bracket: false }
    }
}

/// Largest coefficient (by modulus) of `a − b`.
fn worst(acc: &mut ExactScalar, a: &GradedVector, b: &GradedVector) {
    for (_, c) in a.sub(b).terms() {
        if c.norm_sqr() > acc.norm_sqr() {
            *acc = c.clone();
        }
    }
}

fn worst_scalar(acc: &mut ExactScalar, a: &ExactScalar, b: &ExactScalar) {
    let d = a - b;
    if d.norm_sqr() > acc.norm_sqr() {
        *acc = d;
    }
}

fn basis_upto(w: u32) -> Vec<GradedVector> {
    (0..=w).flat_map(PartitionState::all_of_weight).map(GradedVector::basis).collect()
}

/// Mode indices `k` for which `v(k)u` lands in weights `0..=top`.
fn mode_range(v: &GradedVector, u: &GradedVector, top: u32) -> std::ops::RangeInclusive<i64> {
    let s = v.max_weight() as i64 + u.max_weight() as i64 - 1;
    (s - top as i64)..=s
}

/// `⟨w′, Y(v,z)u⟩` as `{k ↦ ⟨w′, v(k)u⟩}`, the coefficient of `z^{−k−1}`.
fn matrix_coefficients(v: &GradedVector, u: &GradedVector, top: u32) -> BTreeMap<i64, GradedVector> {
    mode_range(v, u, top).map(|k| (k, mode_apply(v, k, u).truncate(top))).filter(|(_, x)| !x.is_zero()).collect()
}

/// `∂_z^i` of `Σ_k c_k z^{−k−1}` at `z`.
fn derivative_at(coeffs: &[(i64, ExactScalar)], i: u32, z: &ExactScalar) -> ExactScalar {
    coeffs
        .iter()
        .map(|(k, c)| {
            let e = -k - 1;
            let falling: i64 = (0..i as i64).map(|j| e - j).product();
            c * &ExactScalar::from_int(falling) * z.powi(e - i as i64)
        })
        .sum()
}

fn factorial(n: u32) -> ExactScalar {
    ExactScalar::from_int((1..=n as i64).product())
}

fn identity_axiom(states: &[GradedVector], top: u32) -> Check {
    let one = GradedVector::vacuum();
    let mut res = ExactScalar::zero();
    for u in states {
        for k in mode_range(&one, u, top) {
            let expect = if k == -1 { u.clone() } else { GradedVector::zero() };
            worst(&mut res, &mode_apply(&one, k, u), &expect);
        }
    }
    Check::exact("axioms.identity", "vacuum field acts as the identity", &res)
}

fn creation_axiom(states: &[GradedVector]) -> Check {
    let one = GradedVector::vacuum();
    let mut res = ExactScalar::zero();
    for v in states {
        for k in 0..=v.max_weight() as i64 + 1 {
            worst(&mut res, &mode_apply(v, k, &one), &GradedVector::zero());
        }
        worst(&mut res, &mode_apply(v, -1, &one), v);
    }
    Check::exact("axioms.creation", "creation property on the vacuum", &res)
}

fn grading_axiom(ctx: &VOAContext, states: &[GradedVector], top: u32) -> Check {
    let mut ok = true;
    for v in states {
        for u in states {
            for k in mode_range(v, u, top) {
                let expect = v.max_weight() as i64 + u.max_weight() as i64 - k - 1;
                let out = mode_apply(v, k, u);
                ok &= out.is_zero() || out.homogeneous_weight().map(i64::from) == Some(expect);
            }
        }
        for k in -2..=v.max_weight() as i64 + 1 {
            ok &= ctx.vertex_mode(v, k).is_ok_and(|op| op.grading_consistent());
        }
    }
    Check::predicate("axioms.grading", "modes shift the weight by wt v minus k minus 1", ok)
}

fn bracket_axiom(states: &[GradedVector], top: u32, corrupt: bool) -> Check {
    // [L(0), v(k)] = (−k−1) v(k) + (L(0)v)(k)
    let mut res = ExactScalar::zero();
    let offset = if corrupt { 0 } else { -1 };
    for v in states {
        let l0v = virasoro_apply(0, v);
        for u in states {
            for k in mode_range(v, u, top) {
                let vk_u = mode_apply(v, k, u);
                let lhs = virasoro_apply(0, &vk_u).sub(&mode_apply(v, k, &virasoro_apply(0, u)));
                let rhs = vk_u.scale(&ExactScalar::from_int(-k + offset)).add(&mode_apply(&l0v, k, u));
                worst(&mut res, &lhs, &rhs);
            }
        }
    }
    Check::exact("axioms.l0_bracket", "L(0) bracket with vertex operators", &res)
}

fn derivative_axiom(states: &[GradedVector], top: u32) -> Check {
    let mut res = ExactScalar::zero();
    for v in states {
        let dv = virasoro_apply(-1, v);
        for u in states {
            for k in mode_range(v, u, top) {
                let dvk_u = mode_apply(&dv, k, u);
                worst(&mut res, &dvk_u, &mode_apply(v, k - 1, u).scale(&ExactScalar::from_int(-k)));
                let bracket = virasoro_apply(-1, &mode_apply(v, k, u)).sub(&mode_apply(v, k, &virasoro_apply(-1, u)));
                worst(&mut res, &bracket, &dvk_u);
            }
        }
    }
    Check::exact("axioms.lminus1_derivative", "L(-1) derivative property", &res)
}

/// Compares `ζ^j` coefficients of `⟨e^{ζL(−1)ᵀ}w′, Y(v,z)u⟩` and `⟨w′, Y(v,z+ζ)e^{ζL(−1)}u⟩`.
fn translation_axiom(states: &[GradedVector], top: u32, order: u32, points: &[ExactScalar]) -> Check {
    let duals: Vec<(PartitionState, Vec<DualVector>)> = (0..=top)
        .flat_map(PartitionState::all_of_weight)
        .map(|p| {
            let mut chain = vec![DualVector::coordinate(p.clone())];
            for _ in 0..order {
                let next = lminus1_transpose(chain.last().expect("nonempty"));
                chain.push(next);
            }
            (p, chain)
        })
        .collect();
    let mut res = ExactScalar::zero();
    for v in states {
        for u in states {
            let mut raised = vec![u.clone()];
            for _ in 0..order {
                let next = virasoro_apply(-1, raised.last().expect("nonempty"));
                raised.push(next);
            }
            let base = matrix_coefficients(v, u, top + order);
            let shifted: Vec<BTreeMap<i64, GradedVector>> = raised.iter().map(|y| matrix_coefficients(v, y, top)).collect();
            for (p, chain) in &duals {
                for z in points {
                    for j in 0..=order {
                        let lhs_terms: Vec<(i64, ExactScalar)> = base.iter().map(|(k, x)| (*k, chain[j as usize].pair(x))).collect();
                        let lhs = derivative_at(&lhs_terms, 0, z) * factorial(j).inv().expect("nonzero");
                        let mut rhs = ExactScalar::zero();
                        for m in 0..=j {
                            let terms: Vec<(i64, ExactScalar)> = shifted[m as usize].iter().map(|(k, x)| (*k, x.coeff(p))).collect();
                            let den = factorial(j - m) * factorial(m);
                            rhs += derivative_at(&terms, j - m, z) * den.inv().expect("nonzero");
                        }
                        worst_scalar(&mut res, &lhs, &rhs);
                    }
                }
            }
        }
    }
    Check::exact("axioms.translation", "translation property of vertex operators", &res)
}

/// `a^{L(0)} Y(v,z) a^{−L(0)} = Y(a^{L(0)}v, az)` on basis matrix elements.
fn scaling_axiom(states: &[GradedVector], top: u32, scale: &ExactScalar, points: &[ExactScalar]) -> Check {
    let mut res = ExactScalar::zero();
    for v in states {
        let wv = v.max_weight() as i64;
        for u in states {
            let wu = u.max_weight() as i64;
            let coeffs = matrix_coefficients(v, u, top);
            for p in (0..=top).flat_map(PartitionState::all_of_weight) {
                let terms: Vec<(i64, ExactScalar)> = coeffs.iter().map(|(k, x)| (*k, x.coeff(&p))).collect();
                for z in points {
                    let lhs = scale.powi(p.weight() as i64 - wu) * derivative_at(&terms, 0, z);
                    let rhs = scale.powi(wv) * derivative_at(&terms, 0, &(scale * z));
                    worst_scalar(&mut res, &lhs, &rhs);
                }
            }
        }
    }
    Check::exact("axioms.scaling", "conjugation by a power of L(0) rescales the variable", &res)
}

/// Both operator orderings of two fields reconstruct to the same rational function.
fn duality_axiom(points: &[ExactScalar]) -> Check {
    let anchor = "two orderings of vertex operators continue to one rational function";
    let a = GradedVector::generator();
    let cases = [
        (DualVector::vacuum(), a.clone(), a.clone(), GradedVector::vacuum()),
        (DualVector::coordinate(PartitionState::new(vec![1])), a.clone(), GradedVector::from_modes(&[2]), a.clone()),
    ];
    let mut ok = true;
    for (wprime, v1, v2, u) in &cases {
        let mut inner = Vec::new();
        let mut outer = Vec::new();
        for (i, z) in points.iter().enumerate() {
            for w in points.iter().skip(i + 1) {
                let (big, small) = if z.norm_sqr() > w.norm_sqr() { (z, w) } else if w.norm_sqr() > z.norm_sqr() { (w, z) } else { continue };
                // v₁ outside v₂, then v₂ outside v₁
                if let Ok(x) = correlator_exact(wprime, &[(v1.clone(), big.clone()), (v2.clone(), small.clone())], u) {
                    inner.push((vec![big.clone(), small.clone()], x));
                }
                if let Ok(x) = correlator_exact(wprime, &[(v2.clone(), big.clone()), (v1.clone(), small.clone())], u) {
                    outer.push((vec![small.clone(), big.clone()], x));
                }
            }
        }
        let ansatz = PoleAnsatz::coincidences(2, 3, true);
        match (reconstruct_rational(&inner, &ansatz, 3), reconstruct_rational(&outer, &ansatz, 3)) {
            (Ok(f), Ok(g)) => {
                let probe: Vec<Vec<ExactScalar>> = inner.iter().chain(&outer).map(|s| s.0.clone()).collect();
                ok &= f.agrees_with(&g, &probe) && f.pole_order(Locus { i: 0, j: Some(1) }) == g.pole_order(Locus { i: 0, j: Some(1) });
            }
            (Err(e), _) | (_, Err(e)) => return Check::error("axioms.duality", anchor, &e),
        }
    }
    Check::predicate("axioms.duality", anchor, ok)
}

/// Sample points for the duality check, pairwise distinct in modulus.
pub fn duality_points() -> Vec<ExactScalar> {
    (1..=12).map(|k| ExactScalar::gaussian(2 * k + 1, 3, k - 6, 5)).collect()
}

/// Per-axiom exact checks on basis states of weight `≤ min(4, N)`.
pub fn check_axioms(ctx: &VOAContext, samples: &[ExactScalar]) -> Report {
    check_axioms_with(ctx, samples, &AxiomOptions::for_context(ctx))
}

pub fn check_axioms_with(ctx: &VOAContext, samples: &[ExactScalar], opts: &AxiomOptions) -> Report {
    let top = opts.max_weight.min(ctx.cutoff());
    let states = basis_upto(top);
    let points: Vec<ExactScalar> = samples.iter().filter(|z| !z.is_zero()).cloned().collect();
    let mut rep = Report::new();
    rep.push(identity_axiom(&states, top));
    rep.push(creation_axiom(&states));
    rep.push(grading_axiom(ctx, &states, top));
    rep.push(bracket_axiom(&states, top, opts.corrupt_bracket));
    rep.push(derivative_axiom(&states, top));
    rep.push(translation_axiom(&states, top, opts.translation_order, &points));
    rep.push(scaling_axiom(&states, top, &opts.scale, &points));
    rep.push(duality_axiom(&duality_points()));
    rep
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axioms_hold_exactly() {
        let ctx = VOAContext::build_heisenberg(4);
        let rep = check_axioms(&ctx, &[ExactScalar::ratio(1, 3), ExactScalar::ratio(3, 2)]);
        assert!(rep.all_pass(), "{rep:?}");
        assert_eq!(rep.checks.len(), 8);
    }

    #[test]
    fn corrupted_bracket_fails() {
        let ctx = VOAContext::build_heisenberg(2);
        let opts = AxiomOptions { corrupt_bracket: true, ..AxiomOptions::for_context(&ctx) };
        let rep = check_axioms_with(&ctx, &[ExactScalar::ratio(1, 3)], &opts);
        assert!(!rep.get("axioms.l0_bracket").unwrap().passed());
    }

    #[test]
    fn derivative_of_matrix_element() {
        // d/dz ⟨w′,Y(a,z)u⟩ = ⟨w′,Y(L(−1)a,z)u⟩ at z = 3/2
        let a = GradedVector::generator();
        let u = GradedVector::from_modes(&[1, 1]);
        let z = ExactScalar::ratio(3, 2);
        let base: Vec<(i64, ExactScalar)> = matrix_coefficients(&a, &u, 4).into_iter().map(|(k, x)| (k, x.coeff(&PartitionState::new(vec![1])))).collect();
        let da = virasoro_apply(-1, &a);
        let der: Vec<(i64, ExactScalar)> = matrix_coefficients(&da, &u, 4).into_iter().map(|(k, x)| (k, x.coeff(&PartitionState::new(vec![1])))).collect();
        assert_eq!(derivative_at(&base, 1, &z), derivative_at(&der, 0, &z));
        assert!(!derivative_at(&base, 1, &z).is_zero());
    }
}
