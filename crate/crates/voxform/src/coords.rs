//! Formal coordinate changes, their Virasoro representation and form invariance.
//!
//! A change `ρ(z) = Σ_{k≥1} a_k z^k` is written `ρ(z) = φ(β₀ z)` with
//! `φ = exp(Σ_{m≥1} β_m z^{m+1}∂_z) z`, so that the scaling acts on the variable first.

use crate::error::{Result, VoxError};
use crate::forms::WForm;
use crate::report::{Check, Report};
use crate::scalars::ExactScalar;
use crate::voa::{gbinom, vertex_apply, virasoro_apply, DualVector, GradedVector, PartitionState, SparseOperator, VOAContext};

/// Power series coefficients, index = exponent, truncated at `len − 1`.
type Series = Vec<ExactScalar>;

fn series_mul(f: &[ExactScalar], g: &[ExactScalar], order: usize) -> Series {
    let mut out = vec![ExactScalar::zero(); order + 1];
    for (i, x) in f.iter().enumerate().take(order + 1) {
        if x.is_zero() {
            continue;
        }
        for (j, y) in g.iter().enumerate().take(order + 1 - i) {
            out[i + j] += x * y;
        }
    }
    out
}

/// `D g = Σ_{m≥1} β_m z^{m+1} g′`.
fn flow_derivation(beta: &[ExactScalar], g: &[ExactScalar], order: usize) -> Series {
    let mut out = vec![ExactScalar::zero(); order + 1];
    for (e, c) in g.iter().enumerate().skip(1) {
        if c.is_zero() {
            continue;
        }
        let dc = c * &ExactScalar::from_int(e as i64);
        for (m, b) in beta.iter().enumerate().skip(1) {
            let target = e - 1 + m + 1;
            if target > order {
                break;
            }
            out[target] += &dc * b;
        }
    }
    out
}

/// `exp(D) z` through `z^order`.
fn flow_of_identity(beta: &[ExactScalar], order: usize) -> Series {
    let mut acc = vec![ExactScalar::zero(); order + 1];
    if order >= 1 {
        acc[1] = ExactScalar::one();
    }
    let mut term = acc.clone();
    for j in 1..=order {
        term = flow_derivation(beta, &term, order).into_iter().map(|c| c * ExactScalar::ratio(1, j as i64)).collect();
        if term.iter().all(ExactScalar::is_zero) {
            break;
        }
        for (a, t) in acc.iter_mut().zip(&term) {
            *a += t;
        }
    }
    acc
}

/// `β₀, …, β_{K−1}` from `a₁, …, a_K`; higher `β` do not affect the series through `z^K`.
pub fn beta_from_a(a: &[ExactScalar]) -> Result<Vec<ExactScalar>> {
    let k = a.len();
    let a1 = a.first().ok_or_else(|| VoxError::InvalidArgument("empty coefficient list".into()))?;
    if a1.is_zero() {
        return Err(VoxError::NotAnAutomorphism);
    }
    let inv = a1.inv()?;
    // φ_j = a_j / a₁^j
    let target: Vec<ExactScalar> = a.iter().enumerate().map(|(j, c)| c * &inv.powi(j as i64 + 1)).collect();
    let mut beta = vec![ExactScalar::zero(); k.max(1)];
    beta[0] = a1.clone();
    for m in 1..k {
        let phi = flow_of_identity(&beta, m + 1);
        beta[m] = &target[m] - &phi[m + 1];
    }
    Ok(beta)
}

/// `a₁, …, a_K` from `β₀, …, β_{K−1}`.
pub fn a_from_beta(beta: &[ExactScalar], order: usize) -> Vec<ExactScalar> {
    let phi = flow_of_identity(beta, order);
    (1..=order).map(|j| &phi[j] * &beta[0].powi(j as i64)).collect()
}

/// `ρ(z) = Σ_{k=1}^{K} a_k z^k` with its exponential coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct CoordinateChange1D {
    a: Vec<ExactScalar>,
    beta: Vec<ExactScalar>,
}

impl CoordinateChange1D {
    pub fn new(a: Vec<ExactScalar>) -> Result<Self> {
        let beta = beta_from_a(&a)?;
        Ok(CoordinateChange1D { a, beta })
    }

    pub fn identity(order: usize) -> Self {
        let mut a = vec![ExactScalar::zero(); order.max(1)];
        a[0] = ExactScalar::one();
        CoordinateChange1D::new(a).expect("identity is invertible")
    }

    pub fn scaling(c: &ExactScalar, order: usize) -> Result<Self> {
        let mut a = vec![ExactScalar::zero(); order.max(1)];
        a[0] = c.clone();
        CoordinateChange1D::new(a)
    }

    /// `z/(1 − cz) = Σ c^{k−1} z^k`.
    pub fn special(c: &ExactScalar, order: usize) -> Self {
        CoordinateChange1D::new((0..order.max(1)).map(|k| c.powi(k as i64)).collect()).expect("a₁ = 1")
    }

    pub fn order(&self) -> usize {
        self.a.len()
    }

    pub fn coefficients(&self) -> &[ExactScalar] {
        &self.a
    }

    pub fn beta(&self) -> &[ExactScalar] {
        &self.beta
    }

    /// `self ∘ other`, i.e. `z ↦ self(other(z))`, through the common order.
    pub fn compose(&self, other: &CoordinateChange1D) -> Result<CoordinateChange1D> {
        let order = self.order().min(other.order());
        let mut inner: Series = vec![ExactScalar::zero()];
        inner.extend(other.a.iter().take(order).cloned());
        let mut power = inner.clone();
        let mut out = vec![ExactScalar::zero(); order + 1];
        for c in self.a.iter().take(order) {
            for (o, p) in out.iter_mut().zip(&power) {
                *o += c * p;
            }
            power = series_mul(&power, &inner, order);
        }
        CoordinateChange1D::new(out.into_iter().skip(1).collect())
    }
}

/// `P(f) = exp(Σ_{m>0} (m+1) β_m L(m)) β₀^{L(0)}` on `V_{≤N}`.
pub fn p_operator(ctx: &VOAContext, f: &CoordinateChange1D) -> SparseOperator {
    let mut gen = SparseOperator::zero(0);
    for (m, b) in f.beta.iter().enumerate().skip(1) {
        if !b.is_zero() && m as u32 <= ctx.cutoff() {
            gen = gen.add(&ctx.virasoro(m as i64).scale(&(b * &ExactScalar::from_int(m as i64 + 1))));
        }
    }
    let mut exp = SparseOperator::identity(ctx);
    let mut term = SparseOperator::identity(ctx);
    for j in 1..=ctx.cutoff() as i64 {
        term = gen.compose(&term).scale(&ExactScalar::ratio(1, j));
        if term.is_zero() {
            break;
        }
        exp = exp.add(&term);
    }
    let mut scale = SparseOperator::zero(0);
    for p in ctx.all_basis() {
        scale.insert(p.clone(), p.clone(), &f.beta[0].powi(p.weight() as i64));
    }
    exp.compose(&scale)
}

/// `P(f₁∘f₂) = P(f₁)P(f₂)` exactly on `V_{≤N}`.
pub fn check_representation(ctx: &VOAContext, pairs: &[(CoordinateChange1D, CoordinateChange1D)]) -> Report {
    let anchor = "the operators of coordinate changes compose as a representation";
    let mut rep = Report::new();
    for (k, (f1, f2)) in pairs.iter().enumerate() {
        let id = format!("coords.representation{k}");
        match f1.compose(f2) {
            Ok(f12) => {
                let lhs = p_operator(ctx, &f12);
                let rhs = p_operator(ctx, f1).compose(&p_operator(ctx, f2));
                let residual = lhs.sub(&rhs).entries().map(|(_, c)| c.clone()).max_by(|a, b| a.norm_sqr().cmp(&b.norm_sqr()));
                rep.push(Check::exact(&id, anchor, &residual.unwrap_or_else(ExactScalar::zero)));
            }
            Err(e) => rep.push(Check::error(&id, anchor, &e)),
        }
    }
    rep
}

/// Round trip `a → β → a` through the full order.
pub fn check_round_trip(changes: &[Vec<ExactScalar>]) -> Report {
    let anchor = "exponential coefficients reproduce the power series";
    let mut rep = Report::new();
    for (k, a) in changes.iter().enumerate() {
        let id = format!("coords.round_trip{k}");
        match beta_from_a(a) {
            Ok(beta) => {
                let back = a_from_beta(&beta, a.len());
                let worst = back.iter().zip(a).map(|(x, y)| x - y).max_by(|x, y| x.norm_sqr().cmp(&y.norm_sqr()));
                rep.push(Check::exact(&id, anchor, &worst.unwrap_or_else(ExactScalar::zero)));
            }
            Err(e) => rep.push(Check::error(&id, anchor, &e)),
        }
    }
    rep
}

/// `⟨w′,[L(n),Y(v,z)]u⟩ = Σ_{m≥−1} C(n+1, m+1) z^{n−m} ⟨w′,Y(L(m)v,z)u⟩` for `w′`, `u` of weight `≤ top`.
pub fn check_commutator(n: i64, v: &GradedVector, z: &ExactScalar, top: u32) -> Result<Check> {
    let anchor = "Virasoro commutator with a vertex operator";
    if z.is_zero() {
        return Err(VoxError::PoleAtOrigin);
    }
    let wv = v.homogeneous_weight().ok_or_else(|| VoxError::InvalidArgument("commutator check needs a homogeneous state".into()))?;
    let raise = n.max(0) as u32;
    let mut residual = ExactScalar::zero();
    for w in 0..=top {
        for p in PartitionState::all_of_weight(w) {
            let u = GradedVector::basis(p);
            let lhs = virasoro_apply(n, &vertex_apply(v, z, &u, top + raise)?)
                .truncate(top)
                .sub(&vertex_apply(v, z, &virasoro_apply(n, &u), top)?);
            let mut rhs = GradedVector::zero();
            for m in -1..=wv as i64 {
                let lmv = virasoro_apply(m, v);
                if lmv.is_zero() {
                    continue;
                }
                let coeff = ExactScalar::from_bigint(gbinom(n + 1, (m + 1) as u32)) * z.powi(n - m);
                if coeff.is_zero() {
                    continue;
                }
                rhs = rhs.add(&vertex_apply(&lmv, z, &u, top)?.scale(&coeff));
            }
            for (_, c) in lhs.sub(&rhs).terms() {
                if c.norm_sqr() > residual.norm_sqr() {
                    residual = c.clone();
                }
            }
        }
    }
    Ok(Check::exact(&format!("coords.commutator.n{n}.wt{wv}"), anchor, &residual))
}

/// Commutator identity for all basis states of weight `≤ max_weight` and `|n| ≤ max_n`.
pub fn check_commutators(max_weight: u32, max_n: i64, z: &ExactScalar, top: u32) -> Report {
    let mut rep = Report::new();
    for w in 0..=max_weight {
        for p in PartitionState::all_of_weight(w) {
            let v = GradedVector::basis(p.clone());
            for n in -max_n..=max_n {
                let id = format!("coords.commutator.n{n}.{}", p);
                match check_commutator(n, &v, z, top) {
                    Ok(c) => rep.push(Check { id, ..c }),
                    Err(e) => rep.push(Check::error(&id, "Virasoro commutator with a vertex operator", &e)),
                }
            }
        }
    }
    rep
}

/// Global changes of all coordinates at once.
#[derive(Clone, Debug, PartialEq)]
pub enum NDimChange {
    Translation(ExactScalar),
    Scaling(ExactScalar),
    /// `z ↦ z/(1 − cz)` on every coordinate.
    Special(ExactScalar),
    /// Applied right to left: the last entry acts first.
    Composite(Vec<NDimChange>),
}

impl NDimChange {
    pub fn apply(&self, z: &ExactScalar) -> Result<ExactScalar> {
        match self {
            NDimChange::Translation(b) => Ok(z + b),
            NDimChange::Scaling(s) => Ok(s * z),
            NDimChange::Special(c) => Ok(z * (ExactScalar::one() - c * z).inv()?),
            NDimChange::Composite(parts) => parts.iter().rev().try_fold(z.clone(), |acc, f| f.apply(&acc)),
        }
    }

    /// `dρ/dz` at `z`; the diagonal Jacobian entry of the coordinate.
    pub fn derivative(&self, z: &ExactScalar) -> Result<ExactScalar> {
        match self {
            NDimChange::Translation(_) => Ok(ExactScalar::one()),
            NDimChange::Scaling(s) => Ok(s.clone()),
            NDimChange::Special(c) => Ok((ExactScalar::one() - c * z).powi(2).inv()?),
            NDimChange::Composite(parts) => {
                let mut point = z.clone();
                let mut der = ExactScalar::one();
                for f in parts.iter().rev() {
                    der *= &f.derivative(&point)?;
                    point = f.apply(&point)?;
                }
                Ok(der)
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            NDimChange::Translation(b) => format!("translation({b})"),
            NDimChange::Scaling(s) => format!("scaling({s})"),
            NDimChange::Special(c) => format!("special({c})"),
            NDimChange::Composite(parts) => parts.iter().map(NDimChange::label).collect::<Vec<_>>().join("*"),
        }
    }
}

/// A state annihilated by every positive Virasoro mode, with its dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct PrimaryVector {
    state: GradedVector,
    delta: u32,
}

impl PrimaryVector {
    pub fn new(state: GradedVector) -> Result<Self> {
        let delta = state.homogeneous_weight().ok_or_else(|| VoxError::InvalidArgument("primary states are homogeneous".into()))?;
        for k in 1..=delta as i64 + 1 {
            if !virasoro_apply(k, &state).is_zero() {
                return Err(VoxError::InvalidArgument(format!("L({k}) does not annihilate the state")));
            }
        }
        Ok(PrimaryVector { state, delta })
    }

    pub fn state(&self) -> &GradedVector {
        &self.state
    }

    pub fn delta(&self) -> u32 {
        self.delta
    }
}

/// `Φ(ρ(z))·∏ ρ′(z_i)^{wt_i} = Φ(z)` on vacuum-to-vacuum forms of primary states.
pub fn check_form_invariance(form: &WForm, change: &NDimChange, configurations: &[Vec<ExactScalar>]) -> Report {
    let anchor = "forms of primary states with differential weights are invariant under coordinate changes";
    let wprime = DualVector::vacuum();
    let mut rep = Report::new();
    for slot in &form.slots {
        if let Err(e) = PrimaryVector::new(slot.state.clone()) {
            rep.push(Check::error("coords.invariance.primary", anchor, &e));
            return rep;
        }
    }
    for (k, pts) in configurations.iter().enumerate() {
        let id = format!("coords.invariance.{}.cfg{k}", change.label());
        let run = || -> Result<ExactScalar> {
            let moved: Vec<ExactScalar> = pts.iter().map(|z| change.apply(z)).collect::<Result<_>>()?;
            let mut jac = ExactScalar::one();
            for (z, slot) in pts.iter().zip(&form.slots) {
                jac *= &change.derivative(z)?.powi(slot.wt_tag as i64);
            }
            Ok(form.value(&wprime, &moved)? * jac - form.value(&wprime, pts)?)
        };
        match run() {
            Ok(r) => rep.push(Check::exact(&id, anchor, &r)),
            Err(e) => rep.push(Check::error(&id, anchor, &e)),
        }
    }
    rep
}

/// Random series with `a₁ ≠ 0`, rational coefficients.
pub fn sample_series(count: usize, order: usize, seed: u64) -> Vec<Vec<ExactScalar>> {
    let mut s = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(1);
    let mut next = move || {
        s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        s >> 33
    };
    (0..count)
        .map(|_| {
            (0..order)
                .map(|k| {
                    let mut num = (next() % 19) as i64 - 9;
                    if k == 0 && num == 0 {
                        num = 1;
                    }
                    ExactScalar::ratio(num, (next() % 5) as i64 + 1)
                })
                .collect()
        })
        .collect()
}

/// Pairs within the scaling and `z/(1 − cz)` family used for the representation check.
pub fn representation_family(order: usize) -> Vec<(CoordinateChange1D, CoordinateChange1D)> {
    let s = |p, q| CoordinateChange1D::scaling(&ExactScalar::ratio(p, q), order).expect("nonzero");
    let c = |p, q| CoordinateChange1D::special(&ExactScalar::ratio(p, q), order);
    vec![
        (s(2, 1), s(-1, 3)),
        (c(1, 2), c(-3, 4)),
        (s(3, 2), c(1, 5)),
        (c(2, 3), s(-2, 1)),
        (c(1, 1), c(1, 1)),
        (CoordinateChange1D::identity(order), c(5, 7)),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(p: i64, q: i64) -> ExactScalar {
        ExactScalar::ratio(p, q)
    }

    #[test]
    fn beta_examples() {
        let id = beta_from_a(&[r(1, 1), r(0, 1), r(0, 1)]).unwrap();
        assert_eq!(id, vec![r(1, 1), r(0, 1), r(0, 1)]);
        let sc = beta_from_a(&[r(3, 1), r(0, 1), r(0, 1)]).unwrap();
        assert_eq!(sc, vec![r(3, 1), r(0, 1), r(0, 1)]);
        assert_eq!(beta_from_a(&[r(0, 1), r(1, 1)]), Err(VoxError::NotAnAutomorphism));
        // z/(1−cz) is the time-one flow of c z²∂
        let sp = CoordinateChange1D::special(&r(2, 5), 6);
        assert_eq!(sp.beta(), &[r(1, 1), r(2, 5), r(0, 1), r(0, 1), r(0, 1), r(0, 1)]);
    }

    #[test]
    fn z_plus_z_squared_round_trip() {
        let a = vec![r(1, 1), r(1, 1), r(0, 1), r(0, 1), r(0, 1), r(0, 1)];
        let beta = beta_from_a(&a).unwrap();
        assert_eq!(beta[1], r(1, 1));
        assert_eq!(beta[2], r(-1, 1));
        assert_eq!(a_from_beta(&beta, 6), a);
        assert!(check_round_trip(&sample_series(20, 6, 11)).all_pass());
    }

    #[test]
    fn p_operator_cases() {
        let ctx = VOAContext::build_heisenberg(4);
        assert_eq!(p_operator(&ctx, &CoordinateChange1D::identity(4)), SparseOperator::identity(&ctx));
        let p = p_operator(&ctx, &CoordinateChange1D::scaling(&r(2, 1), 4).unwrap());
        let x = PartitionState::new(vec![2, 1]);
        assert_eq!(p.entry(&x, &x), r(8, 1));
        assert!(check_representation(&ctx, &representation_family(5)).all_pass());
    }

    #[test]
    fn composition_of_special_maps() {
        let f = CoordinateChange1D::special(&r(1, 1), 6);
        let ff = f.compose(&f).unwrap();
        assert_eq!(ff, CoordinateChange1D::special(&r(2, 1), 6));
    }

    #[test]
    fn commutators_exact() {
        let rep = check_commutators(2, 2, &r(2, 1), 3);
        assert!(rep.all_pass(), "{:?}", rep.failures());
        let one = check_commutator(1, &GradedVector::vacuum(), &r(2, 1), 3).unwrap();
        assert!(one.passed());
    }

    #[test]
    fn two_point_invariance() {
        let a = GradedVector::generator();
        let f = WForm::correlator(vec![a.clone(), a], GradedVector::vacuum(), 12);
        let cfgs = crate::forms::sample_configurations(2, 4, 5);
        for ch in [NDimChange::Scaling(r(2, 1)), NDimChange::Translation(r(1, 1)), NDimChange::Special(r(1, 97))] {
            let rep = check_form_invariance(&f, &ch, &cfgs);
            assert!(rep.all_pass(), "{:?}", rep.failures());
        }
        let bad = WForm::correlator(vec![GradedVector::from_modes(&[1, 1])], GradedVector::vacuum(), 4);
        assert!(!check_form_invariance(&bad, &NDimChange::Scaling(r(2, 1)), &cfgs).all_pass());
    }
}
