//! Slot inputs: plain states at points, or groups of inputs expanded about a centre.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Result, VoxError};
use crate::scalars::{ApproxScalar, ExactScalar, Precision};
use crate::voa::{field_forward, virasoro_apply, DualVector, GradedVector, Insertion, PartitionState};

/// One argument of a form.
///
/// A `Group` stands for `Y(m₁, z₁−c)…Y(m_k, z_k−c)𝟏` inserted at the centre `c`,
/// expanded level by level; all points are absolute.
#[derive(Clone, PartialEq)]
pub enum SlotInput {
    Plain { state: GradedVector, point: ExactScalar },
    Group { members: Vec<SlotInput>, center: ExactScalar },
}

impl fmt::Debug for SlotInput {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SlotInput::Plain { state, point } => write!(f, "{state:?}@{point}"),
            SlotInput::Group { members, center } => write!(f, "{members:?}@{center}"),
        }
    }
}

fn modulus(z: &ExactScalar, prec: Precision) -> ApproxScalar {
    ApproxScalar::from_exact(z, prec).abs()
}

impl SlotInput {
    pub fn plain(state: GradedVector, point: ExactScalar) -> Self {
        SlotInput::Plain { state, point }
    }

    pub fn group(members: Vec<SlotInput>, center: ExactScalar) -> Self {
        SlotInput::Group { members, center }
    }

    /// `Y(outer, z_outer − z_inner) inner`, placed at the inner point.
    pub fn merge(outer: SlotInput, inner: SlotInput) -> Self {
        let center = inner.point().clone();
        SlotInput::Group { members: vec![outer, inner], center }
    }

    /// Insertion point (the centre for groups).
    pub fn point(&self) -> &ExactScalar {
        match self {
            SlotInput::Plain { point, .. } => point,
            SlotInput::Group { center, .. } => center,
        }
    }

    pub fn is_plain(&self) -> bool {
        matches!(self, SlotInput::Plain { .. })
    }

    /// Radius of the disc about the insertion point containing every constituent.
    pub fn spread(&self, prec: Precision) -> ApproxScalar {
        match self {
            SlotInput::Plain { .. } => ApproxScalar::zero(prec),
            SlotInput::Group { members, center } => members.iter().fold(ApproxScalar::zero(prec), |acc, m| {
                acc.max(modulus(&(m.point() - center), prec).add(&m.spread(prec)))
            }),
        }
    }

    /// All plain constituents at their absolute points.
    pub fn leaves(&self) -> Vec<(GradedVector, ExactScalar)> {
        match self {
            SlotInput::Plain { state, point } => vec![(state.clone(), point.clone())],
            SlotInput::Group { members, .. } => members.iter().flat_map(SlotInput::leaves).collect(),
        }
    }

    /// Applies `f` to every point, centres included.
    pub fn map_points(&self, f: &dyn Fn(&ExactScalar) -> Result<ExactScalar>) -> Result<SlotInput> {
        Ok(match self {
            SlotInput::Plain { state, point } => SlotInput::Plain { state: state.clone(), point: f(point)? },
            SlotInput::Group { members, center } => SlotInput::Group {
                members: members.iter().map(|m| m.map_points(f)).collect::<Result<_>>()?,
                center: f(center)?,
            },
        })
    }

    pub fn shifted(&self, c: &ExactScalar) -> SlotInput {
        self.map_points(&|z| Ok(z - c)).expect("translation is total")
    }

    /// Level-graded pieces of the represented state, through level `level`.
    pub fn pieces(&self, level: u32, prec: Precision) -> Result<Vec<(u32, GradedVector)>> {
        match self {
            SlotInput::Plain { state, .. } => Ok(vec![(0, state.clone())]),
            SlotInput::Group { members, center } => expand_group(members, center, level, prec),
        }
    }

    pub fn to_insertion(&self, level: u32, prec: Precision) -> Result<Insertion> {
        match self {
            SlotInput::Plain { state, point } => Ok(Insertion::plain(state.clone(), point.clone())),
            SlotInput::Group { center, .. } => Ok(Insertion::composite(self.pieces(level, prec)?, center.clone())),
        }
    }
}

/// Sorts members by decreasing distance from the centre and checks the nested discs separate.
fn order_members<'a>(members: &'a [SlotInput], center: &ExactScalar, prec: Precision) -> Result<Vec<(&'a SlotInput, ExactScalar)>> {
    let mut ordered: Vec<(&SlotInput, ExactScalar)> = members.iter().map(|m| (m, m.point() - center)).collect();
    ordered.sort_by(|a, b| b.1.norm_sqr().cmp(&a.1.norm_sqr()));
    for w in ordered.windows(2) {
        let outer = modulus(&w[0].1, prec).sub(&w[0].0.spread(prec));
        let inner = modulus(&w[1].1, prec).add(&w[1].0.spread(prec));
        if outer.cmp_re(&inner) != std::cmp::Ordering::Greater {
            return Err(VoxError::OutOfRegion(format!("group members at {} and {} overlap", w[0].0.point(), w[1].0.point())));
        }
    }
    Ok(ordered)
}

fn expand_group(members: &[SlotInput], center: &ExactScalar, level: u32, prec: Precision) -> Result<Vec<(u32, GradedVector)>> {
    let ordered = order_members(members, center, prec)?;
    let mut current: BTreeMap<u32, GradedVector> = BTreeMap::from([(0, GradedVector::vacuum())]);
    for (idx, (member, disp)) in ordered.iter().enumerate().rev() {
        if disp.is_zero() && idx + 1 != ordered.len() {
            return Err(VoxError::DuplicatePoints);
        }
        let member_pieces = member.pieces(level, prec)?;
        let mut next: BTreeMap<u32, GradedVector> = BTreeMap::new();
        for (lc, x) in &current {
            for (lm, vm) in &member_pieces {
                let base = lc + lm;
                if base > level {
                    continue;
                }
                for (q, cq) in vm.terms() {
                    for (p, cp) in x.terms() {
                        let c = cq * cp;
                        field_forward(q, p, level - base, false, &mut |out, n| {
                            let e = out.weight() as i64 - p.weight() as i64 - q.weight() as i64;
                            let factor = if disp.is_zero() {
                                if e != 0 {
                                    return;
                                }
                                ExactScalar::one()
                            } else {
                                disp.powi(e)
                            };
                            let nl = base + out.weight();
                            next.entry(nl).or_insert_with(GradedVector::zero).add_term(out, &(c.scale_int(&n) * factor));
                        });
                    }
                }
            }
        }
        next.retain(|_, v| !v.is_zero());
        current = next;
    }
    Ok(current.into_iter().collect())
}

/// `e^{c L(−1)ᵀ} w′`, a finite sum because `L(−1)ᵀ` lowers weight.
///
/// For correlators ending on the vacuum this moves the frame origin to `c`:
/// `⟨w′, ∏Y(v_i, z_i)𝟏⟩ = ⟨e^{cL(−1)ᵀ}w′, ∏Y(v_i, z_i − c)𝟏⟩`.
pub fn translate_dual(wprime: &DualVector, c: &ExactScalar) -> DualVector {
    if c.is_zero() {
        return wprime.clone();
    }
    let mut acc = wprime.clone();
    let mut term = wprime.clone();
    let mut j = 0i64;
    while !term.is_zero() {
        j += 1;
        term = lminus1_transpose(&term).scale(&(c * ExactScalar::ratio(1, j)));
        acc = acc.add(&term);
    }
    acc
}

/// `L(−1)ᵀ` acting on a dual vector.
pub fn lminus1_transpose(d: &DualVector) -> DualVector {
    let mut out = DualVector::zero();
    let mut weights: Vec<u32> = d.terms().map(|(p, _)| p.weight()).collect();
    weights.dedup();
    for w in weights {
        if w == 0 {
            continue;
        }
        for p in PartitionState::all_of_weight(w - 1) {
            let image = virasoro_apply(-1, &GradedVector::basis(p.clone()));
            let c = d.pair(&image);
            if !c.is_zero() {
                out.add_term(p, &c);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::voa::correlator_exact;

    fn r(p: i64, q: i64) -> ExactScalar {
        ExactScalar::ratio(p, q)
    }

    fn a_at(z: ExactScalar) -> SlotInput {
        SlotInput::plain(GradedVector::generator(), z)
    }

    #[test]
    fn single_member_group_is_translation_exponential() {
        // Y(a, d)𝟏 = e^{dL(−1)} a: level-r piece is d^{r−1} a(−r)𝟏
        let g = SlotInput::group(vec![a_at(r(3, 2))], r(1, 1));
        let pieces = g.pieces(5, Precision(64)).unwrap();
        assert_eq!(pieces.len(), 5);
        for (lvl, v) in pieces {
            let expect = GradedVector::from_modes(&[lvl]).scale(&r(1, 2).powi(lvl as i64 - 1));
            assert_eq!(v, expect);
        }
    }

    #[test]
    fn merge_at_zero_displacement() {
        // Y(a, 1/2) a: level 2 piece is the constant ⟨a,a⟩ part times vacuum
        let m = SlotInput::merge(a_at(r(3, 2)), a_at(r(1, 1)));
        let pieces = m.pieces(6, Precision(64)).unwrap();
        let vac = pieces.iter().find(|(_, v)| !v.coeff(&PartitionState::vacuum()).is_zero()).unwrap();
        assert_eq!(vac.1.coeff(&PartitionState::vacuum()), r(4, 1));
    }

    #[test]
    fn overlapping_members_rejected() {
        let g = SlotInput::group(vec![a_at(r(2, 1)), a_at(r(0, 1))], r(1, 1));
        assert!(matches!(g.pieces(3, Precision(64)), Err(VoxError::OutOfRegion(_))));
    }

    #[test]
    fn frame_translation_of_dual() {
        // ⟨w′, Y(a,3)Y(a,1)𝟏⟩ for w′ = (a(−1)²𝟏)* is frame independent
        let w = DualVector::coordinate(PartitionState::new(vec![1, 1]));
        let a = GradedVector::generator();
        let direct = correlator_exact(&w, &[(a.clone(), r(3, 1)), (a.clone(), r(1, 1))], &GradedVector::vacuum()).unwrap();
        let c = r(1, 2);
        let moved = correlator_exact(&translate_dual(&w, &c), &[(a.clone(), r(5, 2)), (a, r(1, 2))], &GradedVector::vacuum());
        assert_eq!(direct, moved.unwrap());
    }
}
