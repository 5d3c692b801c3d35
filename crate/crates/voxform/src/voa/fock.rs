//! Field action on the partition basis.
//!
//! For `q = a(-n₁)…a(-n_r)𝟏` the field is the normal-ordered product
//! `Y(q, z) = :∏ᵢ ∂^{(nᵢ-1)}a(z)/(nᵢ-1)!:` with
//! `∂^{(n-1)}a(z)/(n-1)! = Σ_m C(-m-1, n-1) a(m) z^{-m-n}`.
//! Every routine here returns the integer coefficient of a basis transition;
//! the accompanying power of `z` is fixed by weights:
//! `⟨p*, Y(q,z) x⟩ = c · z^{wt p − wt x − wt q}`.

use std::cell::RefCell;
use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::state::PartitionState;

thread_local! {
    static BINOM: RefCell<HashMap<(i64, u32), BigInt>> = RefCell::new(HashMap::new());
}

/// Generalized binomial `C(top, k)` for any integer `top`.
pub fn gbinom(top: i64, k: u32) -> BigInt {
    if k == 0 {
        return BigInt::one();
    }
    if top >= 0 && (top as u64) < k as u64 {
        return BigInt::zero();
    }
    BINOM.with(|cache| {
        if let Some(v) = cache.borrow().get(&(top, k)) {
            return v.clone();
        }
        let mut num = BigInt::one();
        let mut den = BigInt::one();
        for i in 0..k as i64 {
            num *= BigInt::from(top - i);
            den *= BigInt::from(i + 1);
        }
        let v = num / den;
        cache.borrow_mut().insert((top, k), v.clone());
        v
    })
}

/// `a(m)` on a basis state: `None` when the result vanishes.
pub fn heisenberg_mode(m: i64, x: &PartitionState) -> Option<(PartitionState, BigInt)> {
    match m {
        0 => None,
        m if m < 0 => Some((x.with_part((-m) as u32), BigInt::one())),
        m => {
            let part = m as u32;
            let cnt = x.count(part);
            if cnt == 0 {
                return None;
            }
            Some((x.without_part(part)?, BigInt::from(m) * BigInt::from(cnt)))
        }
    }
}

/// One way of splitting the factors of a field into annihilation and
/// creation parts, with the number of equivalent labelled choices.
struct Split {
    ann: Vec<u32>,
    cre: Vec<u32>,
    mult: BigInt,
}

fn splits(q: &PartitionState) -> Vec<Split> {
    let groups = q.groups();
    let mut out = Vec::new();
    let mut choice = vec![0u32; groups.len()];
    loop {
        let mut ann = Vec::new();
        let mut cre = Vec::new();
        let mut mult = BigInt::one();
        for (g, &(n, k)) in groups.iter().enumerate() {
            let a = choice[g];
            ann.extend(std::iter::repeat(n).take(a as usize));
            cre.extend(std::iter::repeat(n).take((k - a) as usize));
            mult *= gbinom(k as i64, a);
        }
        out.push(Split { ann, cre, mult });
        // odometer increment
        let mut g = 0;
        loop {
            if g == groups.len() {
                return out;
            }
            if choice[g] < groups[g].1 {
                choice[g] += 1;
                break;
            }
            choice[g] = 0;
            g += 1;
        }
    }
}

fn annihilate(ann: &[u32], state: PartitionState, coeff: BigInt, then: &mut dyn FnMut(PartitionState, BigInt)) {
    let Some((&n, rest)) = ann.split_first() else {
        then(state, coeff);
        return;
    };
    for (m, cnt) in state.groups() {
        let c = &coeff * gbinom(-(m as i64) - 1, n - 1) * BigInt::from(m) * BigInt::from(cnt);
        if c.is_zero() {
            continue;
        }
        let next = state.without_part(m).expect("part present");
        annihilate(rest, next, c, then);
    }
}

fn create(
    cre: &[u32],
    state: PartitionState,
    coeff: BigInt,
    budget: u32,
    exact: bool,
    emit: &mut dyn FnMut(PartitionState, BigInt),
) {
    let Some((&n, rest)) = cre.split_first() else {
        if !exact || budget == 0 {
            emit(state, coeff);
        }
        return;
    };
    let reserve: u32 = rest.iter().sum();
    if budget < n + reserve {
        return;
    }
    let top = budget - reserve;
    let lo = if exact && rest.is_empty() { top } else { n };
    for m in lo..=top {
        let c = &coeff * gbinom(m as i64 - 1, n - 1);
        create(rest, state.with_part(m), c, budget - m, exact, emit);
    }
}

/// All transitions `x → p` of `Y(q, z)` with `wt p ≤ max_out`
/// (or `wt p = max_out` when `exact`).
pub fn field_forward(
    q: &PartitionState,
    x: &PartitionState,
    max_out: u32,
    exact: bool,
    emit: &mut dyn FnMut(PartitionState, BigInt),
) {
    for split in splits(q) {
        if split.ann.len() > x.len() {
            continue;
        }
        annihilate(&split.ann, x.clone(), split.mult.clone(), &mut |y, c| {
            let w = y.weight();
            if w > max_out {
                return;
            }
            create(&split.cre, y, c, max_out - w, exact, emit);
        });
    }
}

fn uncreate(cre: &[u32], state: PartitionState, coeff: BigInt, then: &mut dyn FnMut(PartitionState, BigInt)) {
    let Some((&n, rest)) = cre.split_first() else {
        then(state, coeff);
        return;
    };
    for (m, _) in state.groups() {
        if m < n {
            continue;
        }
        let c = &coeff * gbinom(m as i64 - 1, n - 1);
        uncreate(rest, state.without_part(m).expect("part present"), c, then);
    }
}

fn unannihilate(
    ann: &[u32],
    state: PartitionState,
    coeff: BigInt,
    budget: u32,
    emit: &mut dyn FnMut(PartitionState, BigInt),
) {
    let Some((&n, rest)) = ann.split_last() else {
        emit(state, coeff);
        return;
    };
    let reserve = rest.len() as u32;
    if budget < 1 + reserve {
        return;
    }
    for m in 1..=(budget - reserve) {
        let next = state.with_part(m);
        let cnt = next.count(m);
        let c = &coeff * gbinom(-(m as i64) - 1, n - 1) * BigInt::from(m) * BigInt::from(cnt);
        unannihilate(rest, next, c, budget - m, emit);
    }
}

/// All transitions `x → p` of `Y(q, z)` for a fixed output `p`, enumerated
/// from the output side: inputs satisfy `wt x ≤ max_in` and `len x ≤ max_parts`.
pub fn field_transpose(
    q: &PartitionState,
    p: &PartitionState,
    max_in: u32,
    max_parts: usize,
    emit: &mut dyn FnMut(PartitionState, BigInt),
) {
    for split in splits(q) {
        if split.cre.len() > p.len() {
            continue;
        }
        if p.len() - split.cre.len() + split.ann.len() > max_parts {
            continue;
        }
        uncreate(&split.cre, p.clone(), split.mult.clone(), &mut |y, c| {
            let w = y.weight();
            if w > max_in {
                return;
            }
            unannihilate(&split.ann, y, c, max_in - w, emit);
        });
    }
}

fn create_into(cre: &[u32], target: PartitionState, coeff: BigInt, acc: &mut BigInt) {
    let Some((&n, rest)) = cre.split_first() else {
        if target.is_empty() {
            *acc += coeff;
        }
        return;
    };
    for (m, _) in target.groups() {
        if m < n {
            continue;
        }
        let c = &coeff * gbinom(m as i64 - 1, n - 1);
        create_into(rest, target.without_part(m).expect("part present"), c, acc);
    }
}

/// The single coefficient `c` in `⟨p*, Y(q,z) x⟩ = c z^{wt p − wt x − wt q}`.
pub fn field_coefficient(q: &PartitionState, x: &PartitionState, p: &PartitionState) -> BigInt {
    let mut acc = BigInt::zero();
    for split in splits(q) {
        if split.ann.len() > x.len() {
            continue;
        }
        // every remaining part of x must survive into p
        if x.len() - split.ann.len() + split.cre.len() != p.len() {
            continue;
        }
        annihilate(&split.ann, x.clone(), split.mult.clone(), &mut |y, c| {
            if let Some(target) = p.minus(&y) {
                if target.len() == split.cre.len() {
                    create_into(&split.cre, target, c, &mut acc);
                }
            }
        });
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    fn part(v: &[u32]) -> PartitionState {
        PartitionState::new(v.to_vec())
    }

    fn forward_map(q: &PartitionState, x: &PartitionState, max_out: u32) -> BTreeMap<PartitionState, BigInt> {
        let mut m: BTreeMap<PartitionState, BigInt> = BTreeMap::new();
        field_forward(q, x, max_out, false, &mut |p, c| *m.entry(p).or_insert_with(BigInt::zero) += c);
        m.retain(|_, c| !c.is_zero());
        m
    }

    #[test]
    fn generalized_binomials() {
        assert_eq!(gbinom(5, 2), BigInt::from(10));
        assert_eq!(gbinom(-2, 1), BigInt::from(-2));
        assert_eq!(gbinom(-3, 2), BigInt::from(6));
        assert_eq!(gbinom(1, 3), BigInt::zero());
    }

    #[test]
    fn generator_field_on_vacuum_is_translation_orbit() {
        // Y(a,z)𝟏 = Σ_{m≥1} a(-m) z^{m-1}
        let out = forward_map(&part(&[1]), &PartitionState::vacuum(), 4);
        assert_eq!(out.len(), 4);
        for m in 1..=4 {
            assert_eq!(out[&part(&[m])], BigInt::one());
        }
    }

    #[test]
    fn derivative_field_coefficients() {
        // Y(a(-2)𝟏,z)𝟏 = Σ_{m≥2} (m-1) a(-m) z^{m-2}
        let out = forward_map(&part(&[2]), &PartitionState::vacuum(), 5);
        for m in 2..=5u32 {
            assert_eq!(out[&part(&[m])], BigInt::from(m - 1));
        }
    }

    #[test]
    fn forward_transpose_and_targeted_agree() {
        let states: Vec<PartitionState> = (0..=5).flat_map(PartitionState::all_of_weight).collect();
        let fields = [part(&[1]), part(&[2]), part(&[1, 1]), part(&[2, 1]), part(&[1, 1, 1])];
        for q in &fields {
            for x in &states {
                let fwd = forward_map(q, x, 6);
                for p in states.iter().chain(PartitionState::all_of_weight(6).iter()) {
                    let f = fwd.get(p).cloned().unwrap_or_default();
                    assert_eq!(field_coefficient(q, x, p), f, "targeted {q:?} {x:?} -> {p:?}");
                    let mut t = BigInt::zero();
                    field_transpose(q, p, 5, usize::MAX, &mut |y, c| {
                        if &y == x {
                            t += c;
                        }
                    });
                    assert_eq!(t, f, "transpose {q:?} {x:?} -> {p:?}");
                }
            }
        }
    }

    #[test]
    fn heisenberg_commutator_on_vacuum() {
        let (s, c) = heisenberg_mode(-1, &PartitionState::vacuum()).unwrap();
        let (t, d) = heisenberg_mode(1, &s).unwrap();
        assert!(t.is_vacuum());
        assert_eq!(c * d, BigInt::one());
        assert!(heisenberg_mode(0, &s).is_none());
    }
}
