//! Truncated correlators `⟨w′, Y(v₁,z₁)…Y(vₙ,zₙ) u⟩`.
//!
//! The dual vector is pushed through all fields but the innermost, one
//! intermediate state at a time; the innermost field is then matched against
//! the tail by a single targeted coefficient. The level of a term is the sum of
//! the weights of its intermediate states plus the levels carried by
//! composite insertions; terms above the requested level are dropped.

use std::collections::{BTreeMap, HashMap};

use super::fock::{field_coefficient, field_transpose};
use super::state::{DualVector, GradedVector, PartitionState};
use crate::error::{Result, VoxError};
use crate::scalars::{geometric_tail_bound, ApproxScalar, ExactScalar, Precision};

/// A field insertion: a state (or a level-graded family of states) at a point.
#[derive(Clone, Debug)]
pub struct Insertion {
    pieces: Vec<(u32, GradedVector)>,
    point: ExactScalar,
}

impl Insertion {
    pub fn plain(v: GradedVector, point: ExactScalar) -> Self {
        Insertion { pieces: vec![(0, v)], point }
    }

    /// A state given as `Σ_r v_r`, where `v_r` contributes level `r`.
    pub fn composite(pieces: Vec<(u32, GradedVector)>, point: ExactScalar) -> Self {
        Insertion { pieces, point }
    }

    pub fn point(&self) -> &ExactScalar {
        &self.point
    }

    pub fn pieces(&self) -> &[(u32, GradedVector)] {
        &self.pieces
    }

    pub fn is_plain(&self) -> bool {
        self.pieces.iter().all(|(l, _)| *l == 0)
    }

    pub fn max_weight(&self) -> u32 {
        self.pieces.iter().map(|(_, v)| v.max_weight()).max().unwrap_or(0)
    }

    fn max_parts(&self) -> usize {
        self.pieces.iter().map(|(_, v)| v.max_parts()).max().unwrap_or(0)
    }

    fn min_parts(&self) -> usize {
        self.pieces.iter().flat_map(|(_, v)| v.terms().map(|(p, _)| p.len())).min().unwrap_or(0)
    }
}

/// Level-by-level contributions `D_0, …, D_L` of a truncated expansion.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelSeries(Vec<ExactScalar>);

/// Geometric decay certificate `|D_j| ≤ M q^j`, with the implied tail bound.
#[derive(Clone, Debug)]
pub struct Certificate {
    pub ratio: ApproxScalar,
    pub scale: ApproxScalar,
    pub tail: ApproxScalar,
    pub window: (u32, u32),
}

impl LevelSeries {
    pub fn zeros(level: u32) -> Self {
        LevelSeries(vec![ExactScalar::zero(); level as usize + 1])
    }

    pub fn from_levels(levels: Vec<ExactScalar>) -> Self {
        assert!(!levels.is_empty(), "a level series has at least level 0");
        LevelSeries(levels)
    }

    pub fn top(&self) -> u32 {
        (self.0.len() - 1) as u32
    }

    pub fn level(&self, j: u32) -> ExactScalar {
        self.0.get(j as usize).cloned().unwrap_or_else(ExactScalar::zero)
    }

    pub fn levels(&self) -> &[ExactScalar] {
        &self.0
    }

    pub fn partial_sum(&self) -> ExactScalar {
        self.0.iter().sum()
    }

    /// Partial sum through level `j`.
    pub fn partial_sum_to(&self, j: u32) -> ExactScalar {
        self.0.iter().take(j as usize + 1).sum()
    }

    pub fn add_at(&mut self, j: u32, c: &ExactScalar) {
        if let Some(slot) = self.0.get_mut(j as usize) {
            *slot += c;
        }
    }

    pub fn add(&self, o: &LevelSeries) -> LevelSeries {
        let n = self.0.len().max(o.0.len());
        LevelSeries((0..n as u32).map(|j| self.level(j) + o.level(j)).collect())
    }

    pub fn scale(&self, k: &ExactScalar) -> LevelSeries {
        LevelSeries(self.0.iter().map(|c| c * k).collect())
    }

    pub fn truncate(&self, level: u32) -> LevelSeries {
        LevelSeries(self.0.iter().take(level as usize + 1).cloned().collect())
    }

    pub fn moduli(&self, prec: Precision) -> Vec<ApproxScalar> {
        self.0.iter().map(|c| ApproxScalar::from_exact(c, prec).abs()).collect()
    }

    /// Fits `q` over the last nine levels and bounds the omitted tail.
    pub fn certify(&self, prec: Precision) -> Result<Certificate> {
        let top = self.top();
        let lo = top.saturating_sub(8);
        let moduli = self.moduli(prec);
        let zero = ApproxScalar::zero(prec);
        let nonzero: Vec<u32> = (lo..=top).filter(|&j| !self.0[j as usize].is_zero()).collect();
        if nonzero.len() < 2 {
            let quiet_end = (top.saturating_sub(2)..=top).all(|j| self.0[j as usize].is_zero());
            if quiet_end {
                return Ok(Certificate { ratio: zero.clone(), scale: zero.clone(), tail: zero, window: (lo, top) });
            }
            return Err(VoxError::NonContractive("too few nonzero levels to fit a ratio".into()));
        }
        // levels three or more apart, so short periodic patterns do not inflate the ratio
        let far: Vec<(u32, u32)> =
            nonzero.iter().flat_map(|&i| nonzero.iter().filter(move |&&j| j >= i + 3).map(move |&j| (i, j))).collect();
        let pairs: Vec<(u32, u32)> = if far.is_empty() { nonzero.windows(2).map(|w| (w[0], w[1])).collect() } else { far };
        let mut q = zero.clone();
        for (i, j) in pairs {
            let r = moduli[j as usize].div(&moduli[i as usize]).nth_root(j - i);
            q = q.max(r);
        }
        let q = q.inflate();
        let one = ApproxScalar::one(prec);
        if q.cmp_re(&one) != std::cmp::Ordering::Less {
            return Err(VoxError::NonContractive(format!("fitted ratio {}", q.sci_string())));
        }
        let mut m = zero;
        for (j, d) in moduli.iter().enumerate() {
            if !self.0[j].is_zero() {
                m = m.max(d.div(&q.powi(j as i64)));
            }
        }
        let tail = geometric_tail_bound(&m, &one.div(&q), top)?;
        Ok(Certificate { ratio: q, scale: m, tail, window: (lo, top) })
    }
}

fn check_points(points: &[&ExactScalar]) -> Result<()> {
    for (i, a) in points.iter().enumerate() {
        if a.is_zero() {
            return Err(VoxError::PoleAtOrigin);
        }
        if points[..i].iter().any(|b| *b == *a) {
            return Err(VoxError::DuplicatePoints);
        }
    }
    Ok(())
}

/// Checks `|z₁| > |z₂| > … > 0` for insertions in the given order.
pub fn check_radial_order(points: &[&ExactScalar]) -> Result<()> {
    check_points(points)?;
    for w in points.windows(2) {
        if w[0].norm_sqr() <= w[1].norm_sqr() {
            return Err(VoxError::OutOfRegion(format!("|{}| <= |{}|", w[0], w[1])));
        }
    }
    Ok(())
}

struct PowerCache<'a> {
    z: &'a ExactScalar,
    cache: HashMap<i64, ExactScalar>,
}

impl<'a> PowerCache<'a> {
    fn new(z: &'a ExactScalar) -> Self {
        PowerCache { z, cache: HashMap::new() }
    }

    fn get(&mut self, e: i64) -> ExactScalar {
        let z = self.z;
        if z.is_zero() {
            // only reached for a field acting on the vacuum, where e ≥ 0
            debug_assert!(e >= 0);
            return if e == 0 { ExactScalar::one() } else { ExactScalar::zero() };
        }
        self.cache.entry(e).or_insert_with(|| z.powi(e)).clone()
    }
}

/// Every oscillator of every insertion must pair with an oscillator elsewhere;
/// if one insertion carries more than all the others together, the
/// correlator vanishes identically.
fn cannot_contract(wprime: &DualVector, insertions: &[Insertion], tail: &GradedVector) -> bool {
    // every mode of one factor must pair with a mode of another
    let parts = |it: &mut dyn Iterator<Item = usize>| -> (usize, usize) {
        it.fold((usize::MAX, 0), |(lo, hi), n| (lo.min(n), hi.max(n)))
    };
    let mut ranges: Vec<(usize, usize)> = insertions.iter().map(|i| (i.min_parts(), i.max_parts())).collect();
    ranges.push(parts(&mut tail.terms().map(|(p, _)| p.len())));
    ranges.push(parts(&mut wprime.terms().map(|(p, _)| p.len())));
    if ranges.iter().any(|&(lo, _)| lo == usize::MAX) {
        return true;
    }
    let total: usize = ranges.iter().map(|r| r.1).sum();
    ranges.iter().any(|&(lo, hi)| lo > total - hi)
}

/// True for `c·𝟏`, including zero.
pub fn is_vacuum_multiple(v: &GradedVector) -> bool {
    v.terms().all(|(p, _)| p.is_vacuum())
}

type LevelMap = BTreeMap<PartitionState, Vec<ExactScalar>>;

/// Level series of `⟨w′, Y(v₁,z₁)…Y(vₙ,zₙ) u⟩` in the given (radially ordered) order.
pub fn correlator_series(
    wprime: &DualVector,
    insertions: &[Insertion],
    tail: &GradedVector,
    level: u32,
) -> Result<LevelSeries> {
    let points: Vec<&ExactScalar> = insertions.iter().map(|i| i.point()).collect();
    // Y(v,0)𝟏 = v: an innermost insertion may sit at the origin when the tail is the vacuum
    let absorbed = is_vacuum_multiple(tail) && points.last().is_some_and(|z| z.is_zero());
    if absorbed {
        check_radial_order(&points[..points.len() - 1])?;
    } else {
        check_radial_order(&points)?;
    }
    let mut out = LevelSeries::zeros(level);
    if cannot_contract(wprime, insertions, tail) {
        return Ok(out);
    }
    let Some((last, outer)) = insertions.split_last() else {
        out.add_at(0, &wprime.pair(tail));
        return Ok(out);
    };
    let width = level as usize + 1;
    let mut dual: LevelMap = BTreeMap::new();
    for (p, c) in wprime.terms() {
        let mut v = vec![ExactScalar::zero(); width];
        v[0] = c.clone();
        dual.insert(p.clone(), v);
    }
    let inner_parts: Vec<usize> = insertions.iter().map(Insertion::max_parts).collect();
    for (idx, ins) in outer.iter().enumerate() {
        let parts_cap = tail.max_parts() + inner_parts[idx + 1..].iter().sum::<usize>();
        let mut pow = PowerCache::new(ins.point());
        let mut next: LevelMap = BTreeMap::new();
        for (p, levels) in &dual {
            let Some(min_level) = levels.iter().position(|c| !c.is_zero()) else {
                continue;
            };
            for (piece_level, v) in ins.pieces() {
                let base = min_level as u32 + piece_level;
                if base > level {
                    continue;
                }
                for (q, cq) in v.terms() {
                    field_transpose(q, p, level - base, parts_cap, &mut |s, c| {
                        let e = p.weight() as i64 - s.weight() as i64 - q.weight() as i64;
                        let factor = cq.scale_int(&c) * pow.get(e);
                        let slot = next.entry(s.clone()).or_insert_with(|| vec![ExactScalar::zero(); width]);
                        for (l, x) in levels.iter().enumerate() {
                            let nl = l as u32 + piece_level + s.weight();
                            if nl > level {
                                break;
                            }
                            if !x.is_zero() {
                                slot[nl as usize] += x * &factor;
                            }
                        }
                    });
                }
            }
        }
        next.retain(|_, v| v.iter().any(|c| !c.is_zero()));
        dual = next;
    }
    let mut pow = PowerCache::new(last.point());
    for (p, levels) in &dual {
        for (piece_level, v) in last.pieces() {
            for (q, cq) in v.terms() {
                for (x, cx) in tail.terms() {
                    let c = field_coefficient(q, x, p);
                    if num_traits::Zero::is_zero(&c) {
                        continue;
                    }
                    let e = p.weight() as i64 - x.weight() as i64 - q.weight() as i64;
                    let factor = (cq * cx).scale_int(&c) * pow.get(e);
                    for (l, y) in levels.iter().enumerate() {
                        let nl = l as u32 + piece_level;
                        if nl <= level && !y.is_zero() {
                            out.add_at(nl, &(y * &factor));
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Partial sum of `⟨w′, Y(v₁,z₁)…Y(vₙ,zₙ) u⟩` through level `L`; requires `|z₁| > … > |zₙ| > 0`.
pub fn multi_matrix_element(
    wprime: &DualVector,
    states: &[(GradedVector, ExactScalar)],
    u: &GradedVector,
    level: u32,
) -> Result<ExactScalar> {
    let ins: Vec<Insertion> = states.iter().map(|(v, z)| Insertion::plain(v.clone(), z.clone())).collect();
    Ok(correlator_series(wprime, &ins, u, level)?.partial_sum())
}

/// `⟨w′, Y(v,z) u⟩ = Σ_k ⟨w′, v(k) u⟩ z^{−k−1}`, a finite sum.
pub fn matrix_element(wprime: &DualVector, v: &GradedVector, z: &ExactScalar, u: &GradedVector) -> Result<ExactScalar> {
    multi_matrix_element(wprime, &[(v.clone(), z.clone())], u, 0)
}

/// Reorders plain insertions by decreasing modulus (all states are even, so no signs).
pub fn radial_sort(states: &[(GradedVector, ExactScalar)]) -> Result<Vec<(GradedVector, ExactScalar)>> {
    let mut sorted = states.to_vec();
    sorted.sort_by(|a, b| b.1.norm_sqr().cmp(&a.1.norm_sqr()));
    let points: Vec<&ExactScalar> = sorted.iter().map(|s| &s.1).collect();
    check_radial_order(&points)?;
    Ok(sorted)
}

fn poly_mul(a: &[ExactScalar], b: &[ExactScalar]) -> Vec<ExactScalar> {
    let mut out = vec![ExactScalar::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// `∏_{i<j} (z_i − s^{j−i} z_j)^{p_ij}` as coefficients in `s`.
fn clearing_polynomial(states: &[(GradedVector, ExactScalar)]) -> Vec<ExactScalar> {
    let mut q = vec![ExactScalar::one()];
    for i in 0..states.len() {
        for j in i + 1..states.len() {
            let order = states[i].0.max_weight() + states[j].0.max_weight();
            let mut factor = vec![ExactScalar::zero(); j - i + 1];
            factor[0] = states[i].1.clone();
            factor[j - i] = -states[j].1.clone();
            for _ in 0..order {
                q = poly_mul(&q, &factor);
            }
        }
    }
    q
}

const TRAILING_ZEROS: usize = 5;
const MAX_RESUM_LEVEL: u32 = 160;

/// Exact value of the rational correlator `⟨w′, Y(v₁,z₁)…Y(vₙ,zₙ) u⟩` by mode pairing.
pub fn correlator_exact(
    wprime: &DualVector,
    states: &[(GradedVector, ExactScalar)],
    u: &GradedVector,
) -> Result<ExactScalar> {
    super::wick::wick_correlator(wprime, states, u)
}

/// The same value resummed from the level series.
///
/// Insertions are taken in radial order. Scaling `z_k ↦ s^{k−1} z_k` turns the
/// level series into a power series in `s` whose product with the clearing
/// polynomial terminates; the value is read off at `s = 1`.
pub fn correlator_resummed(
    wprime: &DualVector,
    states: &[(GradedVector, ExactScalar)],
    u: &GradedVector,
) -> Result<ExactScalar> {
    let sorted = radial_sort(states)?;
    let plain: Vec<Insertion> = sorted.iter().map(|(v, z)| Insertion::plain(v.clone(), z.clone())).collect();
    if cannot_contract(wprime, &plain, u) {
        return Ok(ExactScalar::zero());
    }
    if sorted.len() <= 1 {
        // a single field has finitely many levels: only level 0 exists
        return multi_matrix_element(wprime, &sorted, u, 0);
    }
    let q = clearing_polynomial(&sorted);
    let weights: u32 = sorted.iter().map(|s| s.0.max_weight()).sum::<u32>() + u.max_weight() + wprime.max_weight();
    let mut level = (q.len() as u32 + weights + TRAILING_ZEROS as u32).max(8);
    let ins: Vec<Insertion> = sorted.iter().map(|(v, z)| Insertion::plain(v.clone(), z.clone())).collect();
    loop {
        let series = correlator_series(wprime, &ins, u, level)?;
        let numer: Vec<ExactScalar> = poly_mul(series.levels(), &q).into_iter().take(level as usize + 1).collect();
        let last = numer.iter().rposition(|c| !c.is_zero()).map_or(0, |i| i + 1);
        if numer.len() - last >= TRAILING_ZEROS {
            let n1: ExactScalar = numer.iter().sum();
            let q1: ExactScalar = q.iter().sum();
            return Ok(n1 * q1.inv()?);
        }
        if level >= MAX_RESUM_LEVEL {
            return Err(VoxError::NotExact(format!("resummation did not terminate by level {level}")));
        }
        level = (level + level / 2).min(MAX_RESUM_LEVEL);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(p: i64, q: i64) -> ExactScalar {
        ExactScalar::ratio(p, q)
    }

    fn a() -> GradedVector {
        GradedVector::generator()
    }

    #[test]
    fn two_point_levels() {
        let ins = vec![Insertion::plain(a(), r(2, 1)), Insertion::plain(a(), r(1, 1))];
        let s = correlator_series(&DualVector::vacuum(), &ins, &GradedVector::vacuum(), 10).unwrap();
        for j in 0..=10 {
            assert_eq!(s.level(j), r(j as i64, 1 << (j + 1)));
        }
        assert_eq!(s.partial_sum(), r(1, 1) - r(12, 1 << 11));
    }

    #[test]
    fn region_and_points() {
        let bad = [(a(), r(1, 1)), (a(), r(2, 1))];
        let e = multi_matrix_element(&DualVector::vacuum(), &bad, &GradedVector::vacuum(), 4);
        assert!(matches!(e, Err(VoxError::OutOfRegion(_))));
        let dup = [(a(), r(1, 1)), (a(), r(1, 1))];
        let e = multi_matrix_element(&DualVector::vacuum(), &dup, &GradedVector::vacuum(), 4);
        assert_eq!(e, Err(VoxError::DuplicatePoints));
    }

    #[test]
    fn empty_product_is_pairing() {
        let u = GradedVector::from_modes(&[2]);
        let w = DualVector::coordinate(PartitionState::new(vec![2]));
        assert_eq!(multi_matrix_element(&w, &[], &u, 3).unwrap(), ExactScalar::one());
    }

    #[test]
    fn single_matrix_elements() {
        let one = GradedVector::vacuum();
        assert_eq!(matrix_element(&DualVector::vacuum(), &one, &r(3, 1), &one).unwrap(), ExactScalar::one());
        let wa = DualVector::coordinate(PartitionState::new(vec![1]));
        assert_eq!(matrix_element(&wa, &a(), &r(5, 2), &one).unwrap(), ExactScalar::one());
        let wb = DualVector::coordinate(PartitionState::new(vec![2]));
        assert_eq!(matrix_element(&wb, &a(), &r(5, 2), &one).unwrap(), r(5, 2));
        assert!(matrix_element(&DualVector::vacuum(), &a(), &r(5, 2), &a()).unwrap() == r(4, 25));
        assert_eq!(matrix_element(&wa, &a(), &ExactScalar::zero(), &a()), Err(VoxError::PoleAtOrigin));
    }

    #[test]
    fn odd_insertions_vanish() {
        let st = [(a(), r(3, 1)), (a(), r(2, 1)), (a(), r(1, 1))];
        let v = multi_matrix_element(&DualVector::vacuum(), &st, &GradedVector::vacuum(), 12).unwrap();
        assert!(v.is_zero());
    }

    #[test]
    fn exact_two_and_four_point() {
        let two = correlator_exact(&DualVector::vacuum(), &[(a(), r(1, 1)), (a(), r(2, 1))], &GradedVector::vacuum());
        assert_eq!(two.unwrap(), ExactScalar::one());
        let pts = [r(5, 1), r(-3, 1), r(2, 1), r(1, 2)];
        let st: Vec<_> = pts.iter().map(|z| (a(), z.clone())).collect();
        let got = correlator_exact(&DualVector::vacuum(), &st, &GradedVector::vacuum()).unwrap();
        let g = |i: usize, j: usize| (&pts[i] - &pts[j]).powi(-2);
        let wick = g(0, 1) * g(2, 3) + g(0, 2) * g(1, 3) + g(0, 3) * g(1, 2);
        assert_eq!(got, wick);
    }

    #[test]
    fn exact_conformal_two_point() {
        // ⟨ω(z₁)ω(z₂)⟩ = (c/2)/(z₁−z₂)⁴ with c = 1
        let w = GradedVector::conformal();
        let got = correlator_exact(&DualVector::vacuum(), &[(w.clone(), r(3, 1)), (w, r(1, 1))], &GradedVector::vacuum());
        assert_eq!(got.unwrap(), r(1, 32));
    }

    #[test]
    fn innermost_at_origin_on_vacuum() {
        // ⟨𝟏′, Y(a,2) Y(a,0) 𝟏⟩ = ⟨𝟏′, Y(a,2) a⟩ = 1/4
        let ins = vec![Insertion::plain(a(), r(2, 1)), Insertion::plain(a(), ExactScalar::zero())];
        let s = correlator_series(&DualVector::vacuum(), &ins, &GradedVector::vacuum(), 4).unwrap();
        assert_eq!(s.partial_sum(), r(1, 4));
        let e = correlator_series(&DualVector::vacuum(), &ins, &a(), 4);
        assert_eq!(e, Err(VoxError::PoleAtOrigin));
    }

    #[test]
    fn certificate_for_two_point() {
        let ins = vec![Insertion::plain(a(), r(2, 1)), Insertion::plain(a(), r(1, 1))];
        let s = correlator_series(&DualVector::vacuum(), &ins, &GradedVector::vacuum(), 12).unwrap();
        let c = s.certify(Precision(128)).unwrap();
        assert!(c.ratio.to_f64() < 1.0);
        let err = 14.0 / 8192.0;
        assert!(c.tail.to_f64() >= err);
    }
}
