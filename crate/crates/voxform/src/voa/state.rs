//! Partition basis states, vectors and dual vectors of the Fock space.

use std::collections::BTreeMap;
use std::fmt;

use crate::scalars::ExactScalar;

/// Basis monomial `a(-n₁)…a(-n_k)𝟏` with `n₁ ≥ … ≥ n_k ≥ 1`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct PartitionState(Vec<u32>);

impl PartitionState {
    pub fn vacuum() -> Self {
        PartitionState(Vec::new())
    }

    /// Sorts the parts; zero parts are rejected by panicking.
    pub fn new(mut parts: Vec<u32>) -> Self {
        assert!(parts.iter().all(|&p| p > 0), "partition parts must be positive");
        parts.sort_unstable_by(|a, b| b.cmp(a));
        PartitionState(parts)
    }

    pub fn parts(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_vacuum(&self) -> bool {
        self.0.is_empty()
    }

    pub fn weight(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn count(&self, m: u32) -> u32 {
        self.0.iter().filter(|&&p| p == m).count() as u32
    }

    pub fn with_part(&self, m: u32) -> Self {
        let pos = self.0.iter().position(|&p| p < m).unwrap_or(self.0.len());
        let mut v = self.0.clone();
        v.insert(pos, m);
        PartitionState(v)
    }

    /// Removes one copy of `m`, if present.
    pub fn without_part(&self, m: u32) -> Option<Self> {
        let pos = self.0.iter().position(|&p| p == m)?;
        let mut v = self.0.clone();
        v.remove(pos);
        Some(PartitionState(v))
    }

    /// Distinct part values with multiplicities, largest first.
    pub fn groups(&self) -> Vec<(u32, u32)> {
        let mut out: Vec<(u32, u32)> = Vec::new();
        for &p in &self.0 {
            match out.last_mut() {
                Some((v, c)) if *v == p => *c += 1,
                _ => out.push((p, 1)),
            }
        }
        out
    }

    /// Multiset difference `self ∖ other`, if `other ⊆ self`.
    pub fn minus(&self, other: &PartitionState) -> Option<Self> {
        let mut v = self.0.clone();
        for &p in &other.0 {
            let pos = v.iter().position(|&x| x == p)?;
            v.remove(pos);
        }
        Some(PartitionState(v))
    }

    /// All partitions of `l`, in a fixed order (reverse lexicographic).
    pub fn all_of_weight(l: u32) -> Vec<PartitionState> {
        fn rec(rem: u32, max: u32, cur: &mut Vec<u32>, out: &mut Vec<PartitionState>) {
            if rem == 0 {
                out.push(PartitionState(cur.clone()));
                return;
            }
            for p in (1..=rem.min(max)).rev() {
                cur.push(p);
                rec(rem - p, p, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        rec(l, l, &mut Vec::new(), &mut out);
        out
    }
}

impl fmt::Debug for PartitionState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        let s: Vec<String> = self.0.iter().map(|p| format!("a(-{p})")).collect();
        write!(f, "{}1", s.join(""))
    }
}

impl fmt::Display for PartitionState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Finite linear combination of partition states.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct GradedVector(BTreeMap<PartitionState, ExactScalar>);

impl GradedVector {
    pub fn zero() -> Self {
        GradedVector(BTreeMap::new())
    }

    pub fn vacuum() -> Self {
        Self::basis(PartitionState::vacuum())
    }

    pub fn basis(p: PartitionState) -> Self {
        let mut m = BTreeMap::new();
        m.insert(p, ExactScalar::one());
        GradedVector(m)
    }

    /// `a(-n₁)…a(-n_k)𝟏`.
    pub fn from_modes(parts: &[u32]) -> Self {
        Self::basis(PartitionState::new(parts.to_vec()))
    }

    /// The generator `a = a(-1)𝟏`.
    pub fn generator() -> Self {
        Self::from_modes(&[1])
    }

    /// Conformal vector `½ a(-1)²𝟏`.
    pub fn conformal() -> Self {
        Self::from_terms([(PartitionState::new(vec![1, 1]), ExactScalar::ratio(1, 2))])
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (PartitionState, ExactScalar)>) -> Self {
        let mut v = GradedVector::zero();
        for (p, c) in terms {
            v.add_term(p, &c);
        }
        v
    }

    pub fn add_term(&mut self, p: PartitionState, c: &ExactScalar) {
        if c.is_zero() {
            return;
        }
        let slot = self.0.entry(p.clone()).or_insert_with(ExactScalar::zero);
        *slot += c;
        if slot.is_zero() {
            self.0.remove(&p);
        }
    }

    pub fn coeff(&self, p: &PartitionState) -> ExactScalar {
        self.0.get(p).cloned().unwrap_or_else(ExactScalar::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&PartitionState, &ExactScalar)> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn add(&self, o: &GradedVector) -> GradedVector {
        let mut v = self.clone();
        for (p, c) in &o.0 {
            v.add_term(p.clone(), c);
        }
        v
    }

    pub fn sub(&self, o: &GradedVector) -> GradedVector {
        self.add(&o.scale(&ExactScalar::from_int(-1)))
    }

    pub fn scale(&self, k: &ExactScalar) -> GradedVector {
        if k.is_zero() {
            return GradedVector::zero();
        }
        GradedVector(self.0.iter().map(|(p, c)| (p.clone(), c * k)).collect())
    }

    /// Homogeneous projection `P_l`.
    pub fn project(&self, l: u32) -> GradedVector {
        GradedVector(self.0.iter().filter(|(p, _)| p.weight() == l).map(|(p, c)| (p.clone(), c.clone())).collect())
    }

    /// Keeps weights `≤ l`.
    pub fn truncate(&self, l: u32) -> GradedVector {
        GradedVector(self.0.iter().filter(|(p, _)| p.weight() <= l).map(|(p, c)| (p.clone(), c.clone())).collect())
    }

    /// Sorted distinct weights present.
    pub fn weights(&self) -> Vec<u32> {
        let mut w: Vec<u32> = self.0.keys().map(|p| p.weight()).collect();
        w.sort_unstable();
        w.dedup();
        w
    }

    pub fn max_weight(&self) -> u32 {
        self.0.keys().map(|p| p.weight()).max().unwrap_or(0)
    }

    pub fn max_parts(&self) -> usize {
        self.0.keys().map(|p| p.len()).max().unwrap_or(0)
    }

    /// The weight if the vector is homogeneous and nonzero.
    pub fn homogeneous_weight(&self) -> Option<u32> {
        match self.weights().as_slice() {
            [w] => Some(*w),
            _ => None,
        }
    }
}

impl fmt::Debug for GradedVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "0");
        }
        let s: Vec<String> = self.0.iter().map(|(p, c)| format!("({c})·{p:?}")).collect();
        write!(f, "{}", s.join(" + "))
    }
}

/// Linear functional in the coordinate pairing of the partition basis:
/// `⟨p*, q⟩ = δ_{pq}`.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct DualVector(BTreeMap<PartitionState, ExactScalar>);

impl DualVector {
    pub fn zero() -> Self {
        DualVector(BTreeMap::new())
    }

    /// The functional `p*`.
    pub fn coordinate(p: PartitionState) -> Self {
        let mut m = BTreeMap::new();
        m.insert(p, ExactScalar::one());
        DualVector(m)
    }

    /// `𝟏'`.
    pub fn vacuum() -> Self {
        Self::coordinate(PartitionState::vacuum())
    }

    /// Reads a vector's coefficients as a functional.
    pub fn from_vector(v: &GradedVector) -> Self {
        DualVector(v.terms().map(|(p, c)| (p.clone(), c.clone())).collect())
    }

    pub fn add_term(&mut self, p: PartitionState, c: &ExactScalar) {
        if c.is_zero() {
            return;
        }
        let slot = self.0.entry(p.clone()).or_insert_with(ExactScalar::zero);
        *slot += c;
        if slot.is_zero() {
            self.0.remove(&p);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&PartitionState, &ExactScalar)> {
        self.0.iter()
    }

    pub fn coeff(&self, p: &PartitionState) -> ExactScalar {
        self.0.get(p).cloned().unwrap_or_else(ExactScalar::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn pair(&self, v: &GradedVector) -> ExactScalar {
        let mut acc = ExactScalar::zero();
        for (p, c) in &self.0 {
            let x = v.coeff(p);
            if !x.is_zero() {
                acc += c * &x;
            }
        }
        acc
    }

    pub fn scale(&self, k: &ExactScalar) -> DualVector {
        if k.is_zero() {
            return DualVector::zero();
        }
        DualVector(self.0.iter().map(|(p, c)| (p.clone(), c * k)).collect())
    }

    pub fn add(&self, o: &DualVector) -> DualVector {
        let mut v = self.clone();
        for (p, c) in &o.0 {
            v.add_term(p.clone(), c);
        }
        v
    }

    pub fn max_weight(&self) -> u32 {
        self.0.keys().map(|p| p.weight()).max().unwrap_or(0)
    }

    pub fn as_vector(&self) -> GradedVector {
        GradedVector::from_terms(self.0.iter().map(|(p, c)| (p.clone(), c.clone())))
    }
}

impl fmt::Debug for DualVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "dual[{:?}]", self.as_vector())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_counts() {
        let dims: Vec<usize> = (0..=8).map(|l| PartitionState::all_of_weight(l).len()).collect();
        assert_eq!(dims, vec![1, 1, 2, 3, 5, 7, 11, 15, 22]);
    }

    #[test]
    fn multiset_ops() {
        let p = PartitionState::new(vec![1, 3, 1, 2]);
        assert_eq!(p.parts(), &[3, 2, 1, 1]);
        assert_eq!(p.count(1), 2);
        assert_eq!(p.with_part(2).parts(), &[3, 2, 2, 1, 1]);
        assert_eq!(p.without_part(1).unwrap().parts(), &[3, 2, 1]);
        assert!(p.without_part(4).is_none());
        assert_eq!(p.groups(), vec![(3, 1), (2, 1), (1, 2)]);
        let q = PartitionState::new(vec![1, 3]);
        assert_eq!(p.minus(&q).unwrap().parts(), &[2, 1]);
    }

    #[test]
    fn cancellation_removes_terms() {
        let mut v = GradedVector::generator();
        v.add_term(PartitionState::new(vec![1]), &ExactScalar::from_int(-1));
        assert!(v.is_zero());
        let d = DualVector::vacuum();
        assert_eq!(d.pair(&GradedVector::vacuum()), ExactScalar::one());
    }
}
