//! The truncated Heisenberg vertex algebra `V_{≤N}` and its mode operators.

use std::collections::BTreeMap;

use num_bigint::BigInt;

use super::fock::{field_forward, heisenberg_mode};
use super::state::{DualVector, GradedVector, PartitionState};
use crate::error::{Result, VoxError};

use crate::scalars::ExactScalar;

/// Linear operator on `V_{≤N}`; homogeneous operators carry their weight shift.
#[derive(Clone, PartialEq, Debug)]
pub struct SparseOperator {
    // in -> (out -> coefficient)
    cols: BTreeMap<PartitionState, BTreeMap<PartitionState, ExactScalar>>,
    weight_shift: Option<i64>,
}

impl SparseOperator {
    pub fn zero(weight_shift: i64) -> Self {
        SparseOperator { cols: BTreeMap::new(), weight_shift: Some(weight_shift) }
    }

    /// The zero operator without a fixed weight shift.
    pub fn zero_mixed() -> Self {
        SparseOperator { cols: BTreeMap::new(), weight_shift: None }
    }

    pub fn identity(ctx: &VOAContext) -> Self {
        let mut op = Self::zero(0);
        for p in ctx.all_basis() {
            op.insert(p.clone(), p.clone(), &ExactScalar::one());
        }
        op
    }

    /// `None` for sums of pieces with different shifts.
    pub fn weight_shift(&self) -> Option<i64> {
        self.weight_shift
    }

    /// Adds `c` to the `(out, in)` entry.
    pub fn insert(&mut self, out: PartitionState, input: PartitionState, c: &ExactScalar) {
        if c.is_zero() {
            return;
        }
        if let Some(shift) = self.weight_shift {
            debug_assert_eq!(out.weight() as i64, input.weight() as i64 + shift);
        }
        let col = self.cols.entry(input.clone()).or_default();
        let slot = col.entry(out.clone()).or_insert_with(ExactScalar::zero);
        *slot += c;
        if slot.is_zero() {
            col.remove(&out);
            if col.is_empty() {
                self.cols.remove(&input);
            }
        }
    }

    /// Entries as `((out, in), coefficient)`.
    pub fn entries(&self) -> impl Iterator<Item = ((&PartitionState, &PartitionState), &ExactScalar)> {
        self.cols.iter().flat_map(|(i, col)| col.iter().map(move |(o, c)| ((o, i), c)))
    }

    pub fn entry(&self, out: &PartitionState, input: &PartitionState) -> ExactScalar {
        self.cols
            .get(input)
            .and_then(|c| c.get(out))
            .cloned()
            .unwrap_or_else(ExactScalar::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.cols.is_empty()
    }

    pub fn apply(&self, v: &GradedVector) -> GradedVector {
        let mut out = GradedVector::zero();
        for (p, c) in v.terms() {
            if let Some(col) = self.cols.get(p) {
                for (o, e) in col {
                    out.add_term(o.clone(), &(c * e));
                }
            }
        }
        out
    }

    /// `w' ∘ self`, i.e. the transpose acting on functionals.
    pub fn transpose_apply(&self, d: &DualVector) -> DualVector {
        let mut out = DualVector::zero();
        for (i, col) in &self.cols {
            let mut acc = ExactScalar::zero();
            for (o, e) in col {
                let x = d.coeff(o);
                if !x.is_zero() {
                    acc += &x * e;
                }
            }
            out.add_term(i.clone(), &acc);
        }
        out
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &SparseOperator) -> SparseOperator {
        let mut out = SparseOperator {
            cols: BTreeMap::new(),
            weight_shift: self.weight_shift.zip(other.weight_shift).map(|(a, b)| a + b),
        };
        for (i, col) in &other.cols {
            let img = self.apply(&GradedVector::from_terms(col.iter().map(|(o, c)| (o.clone(), c.clone()))));
            for (o, c) in img.terms() {
                out.insert(o.clone(), i.clone(), c);
            }
        }
        out
    }

    /// Sum; the result is mixed when nonzero summands have different shifts.
    pub fn add(&self, other: &SparseOperator) -> SparseOperator {
        let shift = if self.is_zero() {
            other.weight_shift
        } else if other.is_zero() || self.weight_shift == other.weight_shift {
            self.weight_shift
        } else {
            None
        };
        let mut out = self.clone();
        out.weight_shift = shift;
        for ((o, i), c) in other.entries() {
            out.insert(o.clone(), i.clone(), c);
        }
        out
    }

    pub fn scale(&self, k: &ExactScalar) -> SparseOperator {
        let mut out = SparseOperator { cols: BTreeMap::new(), weight_shift: self.weight_shift };
        for ((o, i), c) in self.entries() {
            out.insert(o.clone(), i.clone(), &(c * k));
        }
        out
    }

    pub fn sub(&self, other: &SparseOperator) -> SparseOperator {
        self.add(&other.scale(&ExactScalar::from_int(-1)))
    }

    /// `[self, other]`.
    pub fn commutator(&self, other: &SparseOperator) -> SparseOperator {
        self.compose(other).sub(&other.compose(self))
    }

    /// Keeps only columns with input weight `≤ w`.
    pub fn restrict_inputs(&self, w: u32) -> SparseOperator {
        SparseOperator {
            cols: self.cols.iter().filter(|(i, _)| i.weight() <= w).map(|(i, c)| (i.clone(), c.clone())).collect(),
            weight_shift: self.weight_shift,
        }
    }

    /// Every stored entry respects the weight shift.
    pub fn grading_consistent(&self) -> bool {
        match self.weight_shift {
            Some(shift) => self.entries().all(|((o, i), _)| o.weight() as i64 == i.weight() as i64 + shift),
            None => false,
        }
    }
}

/// `v(k) u` computed exactly, without any weight cutoff.
pub fn mode_apply(v: &GradedVector, k: i64, u: &GradedVector) -> GradedVector {
    let mut out = GradedVector::zero();
    for (q, cq) in v.terms() {
        for (x, cx) in u.terms() {
            let w = q.weight() as i64 + x.weight() as i64 - k - 1;
            if w < 0 {
                continue;
            }
            let c = cq * cx;
            field_forward(q, x, w as u32, true, &mut |p, n| out.add_term(p, &c.scale_int(&n)));
        }
    }
    out
}

/// `Y(v,z)u = Σ_k v(k)u z^{−k−1}` projected to weights `≤ top`.
pub fn vertex_apply(v: &GradedVector, z: &ExactScalar, u: &GradedVector, top: u32) -> Result<GradedVector> {
    let mut out = GradedVector::zero();
    for wv in v.weights() {
        let piece = v.project(wv);
        for wu in u.weights() {
            let s = wv as i64 + wu as i64 - 1;
            for k in (s - top as i64)..=s {
                let image = mode_apply(&piece, k, &u.project(wu));
                if image.is_zero() {
                    continue;
                }
                if z.is_zero() {
                    match k {
                        0.. => return Err(VoxError::PoleAtOrigin),
                        -1 => out = out.add(&image),
                        _ => {}
                    }
                } else {
                    out = out.add(&image.scale(&z.powi(-k - 1)));
                }
            }
        }
    }
    Ok(out)
}

/// `L(n) u`, exactly.
pub fn virasoro_apply(n: i64, u: &GradedVector) -> GradedVector {
    mode_apply(&GradedVector::conformal(), n + 1, u)
}

/// Truncated rank-one Heisenberg vertex algebra with cutoff weight `N`.
#[derive(Clone, Debug)]
pub struct VOAContext {
    cutoff: u32,
    basis: Vec<Vec<PartitionState>>,
}

impl VOAContext {
    /// Enumerates the partition basis through weight `N`.
    pub fn build_heisenberg(cutoff: u32) -> Self {
        let basis = (0..=cutoff).map(PartitionState::all_of_weight).collect();
        VOAContext { cutoff, basis }
    }

    pub fn cutoff(&self) -> u32 {
        self.cutoff
    }

    pub fn central_charge(&self) -> ExactScalar {
        ExactScalar::one()
    }

    pub fn dim(&self, l: u32) -> usize {
        self.basis.get(l as usize).map_or(0, |b| b.len())
    }

    pub fn basis(&self, l: u32) -> &[PartitionState] {
        self.basis.get(l as usize).map_or(&[], |b| b.as_slice())
    }

    pub fn all_basis(&self) -> impl Iterator<Item = &PartitionState> {
        self.basis.iter().flatten()
    }

    /// `a(m)` on `V_{≤N}`.
    pub fn heisenberg(&self, m: i64) -> SparseOperator {
        let mut op = SparseOperator::zero(-m);
        for x in self.all_basis() {
            if let Some((y, c)) = heisenberg_mode(m, x) {
                if y.weight() <= self.cutoff {
                    op.insert(y, x.clone(), &ExactScalar::from_bigint(c));
                }
            }
        }
        op
    }

    /// The mode `v(k)` for homogeneous `v`, with shift `wt v − k − 1`.
    pub fn vertex_mode(&self, v: &GradedVector, k: i64) -> Result<SparseOperator> {
        if v.is_zero() {
            return Ok(SparseOperator::zero(0));
        }
        let w = v.homogeneous_weight().ok_or_else(|| {
            VoxError::InvalidArgument("vertex_mode needs a homogeneous state; use vertex_mode_pieces".into())
        })?;
        Ok(self.mode_of_homogeneous(v, w, k))
    }

    /// `v(k)` split into homogeneous pieces of `v`.
    pub fn vertex_mode_pieces(&self, v: &GradedVector, k: i64) -> Vec<SparseOperator> {
        v.weights().into_iter().map(|w| self.mode_of_homogeneous(&v.project(w), w, k)).collect()
    }

    fn mode_of_homogeneous(&self, v: &GradedVector, w: u32, k: i64) -> SparseOperator {
        let shift = w as i64 - k - 1;
        let mut op = SparseOperator::zero(shift);
        for x in self.all_basis() {
            let out_w = x.weight() as i64 + shift;
            if out_w < 0 || out_w > self.cutoff as i64 {
                continue;
            }
            for (q, cq) in v.terms() {
                let mut acc: BTreeMap<PartitionState, BigInt> = BTreeMap::new();
                field_forward(q, x, out_w as u32, true, &mut |p, c| {
                    *acc.entry(p).or_default() += c;
                });
                for (p, c) in acc {
                    op.insert(p, x.clone(), &cq.scale_int(&c));
                }
            }
        }
        op
    }

    /// `L(n) = ω(n+1)`.
    pub fn virasoro(&self, n: i64) -> SparseOperator {
        self.mode_of_homogeneous(&GradedVector::conformal(), 2, n + 1)
    }

    /// Weight-filtered equality on inputs/outputs `≤ head`.
    pub fn agree_below(&self, a: &SparseOperator, b: &SparseOperator, head: u32) -> bool {
        self.all_basis().filter(|p| p.weight() <= head).all(|x| {
            let v = GradedVector::basis(x.clone());
            a.apply(&v).truncate(head) == b.apply(&v).truncate(head)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimensions() {
        let ctx = VOAContext::build_heisenberg(4);
        let dims: Vec<usize> = (0..=4).map(|l| ctx.dim(l)).collect();
        assert_eq!(dims, vec![1, 1, 2, 3, 5]);
        assert_eq!(VOAContext::build_heisenberg(0).dim(0), 1);
    }

    #[test]
    fn generator_modes_are_heisenberg_modes() {
        let ctx = VOAContext::build_heisenberg(5);
        for k in -4..=4 {
            let m = ctx.vertex_mode(&GradedVector::generator(), k).unwrap();
            assert_eq!(m, ctx.heisenberg(k), "k = {k}");
        }
    }

    #[test]
    fn vacuum_field_is_identity() {
        let ctx = VOAContext::build_heisenberg(4);
        let id = ctx.vertex_mode(&GradedVector::vacuum(), -1).unwrap();
        assert_eq!(id, SparseOperator::identity(&ctx));
        assert!(ctx.vertex_mode(&GradedVector::vacuum(), 0).unwrap().is_zero());
    }

    #[test]
    fn virasoro_basics() {
        let ctx = VOAContext::build_heisenberg(5);
        let l0 = ctx.virasoro(0);
        for p in ctx.all_basis() {
            let v = GradedVector::basis(p.clone());
            assert_eq!(l0.apply(&v), v.scale(&ExactScalar::from_int(p.weight() as i64)));
        }
        assert!(ctx.virasoro(-1).apply(&GradedVector::vacuum()).is_zero());
        let c = ctx.virasoro(1).commutator(&ctx.virasoro(-1));
        assert!(c.apply(&GradedVector::vacuum()).is_zero());
    }

    #[test]
    fn uncut_modes_match_operators() {
        let ctx = VOAContext::build_heisenberg(6);
        let v = GradedVector::from_modes(&[2, 1]);
        let u = GradedVector::from_modes(&[1, 1]);
        for k in -2..=4 {
            assert_eq!(mode_apply(&v, k, &u), ctx.vertex_mode(&v, k).unwrap().apply(&u));
        }
        assert_eq!(virasoro_apply(-1, &GradedVector::generator()), GradedVector::from_modes(&[2]));
    }

    #[test]
    fn mode_grading_consistent() {
        let ctx = VOAContext::build_heisenberg(5);
        let v = GradedVector::from_modes(&[2, 1]);
        for k in -3..=4 {
            let op = ctx.vertex_mode(&v, k).unwrap();
            assert!(op.grading_consistent());
            assert_eq!(op.weight_shift(), Some(3 - k - 1));
        }
    }
}
