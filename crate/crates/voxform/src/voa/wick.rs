//! Closed-form correlators of the free boson by pairing modes.
//!
//! Every insertion `Y(a(-n₁)…a(-n_r)𝟏, z)` is the normal-ordered product of the
//! divided derivatives `∂^{(nᵢ-1)}a(z)`. A correlator is the sum over perfect
//! matchings of all modes across different insertions, the dual vector and the
//! tail, each pair contributing its two-point function.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::One;

use super::fock::gbinom;
use super::state::{DualVector, GradedVector, PartitionState};
use crate::error::{Result, VoxError};
use crate::scalars::ExactScalar;

/// Who owns a mode: the dual vector, an insertion, or the tail.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Owner {
    Dual,
    Field(usize),
    Tail,
}

#[derive(Clone, Copy, Debug)]
struct Mode {
    owner: Owner,
    n: u32,
}

struct Pairing<'a> {
    points: &'a [ExactScalar],
    powers: HashMap<(usize, usize, u32), ExactScalar>,
}

impl Pairing<'_> {
    fn point(&self, o: Owner) -> ExactScalar {
        match o {
            Owner::Field(i) => self.points[i].clone(),
            _ => ExactScalar::zero(),
        }
    }

    /// `(z_i − z_j)^{−k}`, with the tail at the origin.
    fn inverse_power(&mut self, i: Owner, j: Owner, k: u32) -> Result<ExactScalar> {
        let key = |o: Owner| match o {
            Owner::Field(i) => i,
            _ => usize::MAX,
        };
        let entry = (key(i), key(j), k);
        if let Some(v) = self.powers.get(&entry) {
            return Ok(v.clone());
        }
        let d = self.point(i) - self.point(j);
        if d.is_zero() {
            let at_origin = matches!(i, Owner::Tail) || matches!(j, Owner::Tail);
            return Err(if at_origin { VoxError::PoleAtOrigin } else { VoxError::DuplicatePoints });
        }
        let v = d.powi(-(k as i64));
        self.powers.insert(entry, v.clone());
        Ok(v)
    }

    fn contraction(&mut self, x: Mode, y: Mode) -> Result<ExactScalar> {
        let (x, y) = match (x.owner, y.owner) {
            (Owner::Dual, _) => (x, y),
            (_, Owner::Dual) => (y, x),
            _ => (x, y),
        };
        match (x.owner, y.owner) {
            (Owner::Dual, Owner::Dual) | (Owner::Tail, Owner::Tail) => Ok(ExactScalar::zero()),
            // [a(n), a(−m)] = n δ
            (Owner::Dual, Owner::Tail) => Ok(if x.n == y.n { ExactScalar::from_int(x.n as i64) } else { ExactScalar::zero() }),
            // [a(n), ∂^{(m−1)}a(z)] = n C(n−1, m−1) z^{n−m}
            (Owner::Dual, Owner::Field(_)) => {
                if x.n < y.n {
                    return Ok(ExactScalar::zero());
                }
                let c = BigInt::from(x.n) * gbinom(x.n as i64 - 1, y.n - 1);
                Ok(ExactScalar::from_bigint(c) * self.point(y.owner).powi((x.n - y.n) as i64))
            }
            // ∂^{(m−1)}∂^{(n−1)} of (z − w)^{−2}
            _ => {
                let (m, n) = (x.n, y.n);
                let c = BigInt::from(n) * gbinom((m + n - 1) as i64, m - 1);
                let signed = if (m - 1) % 2 == 1 { -c } else { c };
                Ok(ExactScalar::from_bigint(signed) * self.inverse_power(x.owner, y.owner, m + n)?)
            }
        }
    }
}

/// Sum over perfect matchings of `modes` with no pair inside one owner.
fn matchings(modes: &mut Vec<Mode>, pairing: &mut Pairing) -> Result<ExactScalar> {
    let Some(first) = modes.pop() else {
        return Ok(ExactScalar::one());
    };
    let mut acc = ExactScalar::zero();
    for j in 0..modes.len() {
        let other = modes[j];
        if other.owner == first.owner {
            continue;
        }
        let c = pairing.contraction(first, other)?;
        if c.is_zero() {
            continue;
        }
        let taken = modes.remove(j);
        let rest = matchings(modes, pairing);
        modes.insert(j, taken);
        acc += c * rest?;
    }
    modes.push(first);
    Ok(acc)
}

/// `∏ nᵢ · ∏ mult!`, the norm of a monomial under the standard form.
fn monomial_norm(p: &PartitionState) -> BigInt {
    let mut out = BigInt::one();
    for &n in p.parts() {
        out *= BigInt::from(n);
    }
    for (_, mult) in p.groups() {
        for k in 2..=mult {
            out *= BigInt::from(k);
        }
    }
    out
}

fn contractible(counts: &[usize]) -> bool {
    let total: usize = counts.iter().sum();
    total % 2 == 0 && counts.iter().all(|&c| 2 * c <= total)
}

/// `⟨w′, Y(v₁,z₁)…Y(vₙ,zₙ) u⟩` as an exact rational function value; valid at any distinct points.
pub fn wick_correlator(wprime: &DualVector, states: &[(GradedVector, ExactScalar)], u: &GradedVector) -> Result<ExactScalar> {
    let points: Vec<ExactScalar> = states.iter().map(|s| s.1.clone()).collect();
    for (i, z) in points.iter().enumerate() {
        if points[..i].contains(z) {
            return Err(VoxError::DuplicatePoints);
        }
    }
    let mut pairing = Pairing { points: &points, powers: HashMap::new() };
    let mut total = ExactScalar::zero();
    let field_terms: Vec<Vec<(&PartitionState, &ExactScalar)>> = states.iter().map(|(v, _)| v.terms().collect()).collect();
    for (pd, cd) in wprime.terms() {
        let dual_coeff = cd * ExactScalar::from_bigint(monomial_norm(pd)).inv()?;
        for (pu, cu) in u.terms() {
            let mut choice = vec![0usize; states.len()];
            loop {
                if field_terms.iter().all(|t| !t.is_empty()) {
                    let mut coeff = &dual_coeff * cu;
                    let mut counts = vec![pd.len(), pu.len()];
                    let mut modes: Vec<Mode> = pd.parts().iter().map(|&n| Mode { owner: Owner::Dual, n }).collect();
                    modes.extend(pu.parts().iter().map(|&n| Mode { owner: Owner::Tail, n }));
                    for (i, t) in field_terms.iter().enumerate() {
                        let (p, c) = t[choice[i]];
                        coeff = coeff * c;
                        counts.push(p.len());
                        modes.extend(p.parts().iter().map(|&n| Mode { owner: Owner::Field(i), n }));
                    }
                    if contractible(&counts) && !coeff.is_zero() {
                        // pairing the largest owner first prunes dead branches early
                        modes.sort_by_key(|m| counts_of(&counts, m.owner));
                        total += coeff * matchings(&mut modes, &mut pairing)?;
                    }
                }
                // odometer over the terms of each field state
                let mut k = 0;
                while k < choice.len() {
                    choice[k] += 1;
                    if choice[k] < field_terms[k].len() {
                        break;
                    }
                    choice[k] = 0;
                    k += 1;
                }
                if k == choice.len() {
                    break;
                }
            }
        }
    }
    Ok(total)
}

fn counts_of(counts: &[usize], o: Owner) -> usize {
    match o {
        Owner::Dual => counts[0],
        Owner::Tail => counts[1],
        Owner::Field(i) => counts[2 + i],
    }
}

#[cfg(test)]
mod tests {
    use super::super::correlator::correlator_resummed;
    use super::*;

    fn r(p: i64, q: i64) -> ExactScalar {
        ExactScalar::ratio(p, q)
    }

    fn basis(parts: &[u32]) -> GradedVector {
        GradedVector::basis(PartitionState::new(parts.to_vec()))
    }

    #[test]
    fn agrees_with_resummed_series() {
        let states = [basis(&[1]), basis(&[2]), basis(&[1, 1]), GradedVector::conformal(), basis(&[3, 1])];
        let duals = [DualVector::vacuum(), DualVector::coordinate(PartitionState::new(vec![1])), DualVector::coordinate(PartitionState::new(vec![2, 1]))];
        let tails = [GradedVector::vacuum(), basis(&[1]), basis(&[1, 1]), basis(&[2])];
        let pts = [r(7, 2), ExactScalar::gaussian(-2, 1, 1, 3), r(1, 2)];
        for w in &duals {
            for u in &tails {
                for (i, v1) in states.iter().enumerate() {
                    let v2 = &states[(i + 2) % states.len()];
                    let v3 = &states[(i + 3) % states.len()];
                    let ins = [(v1.clone(), pts[0].clone()), (v2.clone(), pts[1].clone()), (v3.clone(), pts[2].clone())];
                    let fast = wick_correlator(w, &ins, u).unwrap();
                    let slow = correlator_resummed(w, &ins, u).unwrap();
                    assert_eq!(fast, slow, "{v1:?} {v2:?} {v3:?} {u:?}");
                }
            }
        }
    }

    #[test]
    fn coincident_points_and_origin() {
        let a = basis(&[1]);
        let e = wick_correlator(&DualVector::vacuum(), &[(a.clone(), r(1, 1)), (a.clone(), r(1, 1))], &GradedVector::vacuum());
        assert_eq!(e, Err(VoxError::DuplicatePoints));
        let e = wick_correlator(&DualVector::vacuum(), &[(a.clone(), ExactScalar::zero())], &a);
        assert_eq!(e, Err(VoxError::PoleAtOrigin));
        // Y(a,0)𝟏 = a
        let v = wick_correlator(&DualVector::coordinate(PartitionState::new(vec![1])), &[(a.clone(), ExactScalar::zero())], &GradedVector::vacuum());
        assert_eq!(v.unwrap(), ExactScalar::one());
    }
}
