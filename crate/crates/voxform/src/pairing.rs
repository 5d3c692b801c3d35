//! The invariant bilinear form `⟨·,·⟩_λ`, its dual bases, adjoint modes and
//! the Möbius conjugation `T_λ`.
//!
//! The form depends on `λ` only through `λ²`; with `λ = −ξ√ε` and `ξ = ±i`
//! one has `λ² = −ε` exactly, so no square root is ever needed here.

use std::cell::RefCell;
use std::collections::HashMap;

use num_bigint::BigInt;

use crate::error::{Result, VoxError};
use crate::report::{Check, Report};
use crate::scalars::linalg::{self, Matrix};
use crate::scalars::ExactScalar;
use crate::voa::{
    matrix_element, mode_apply, virasoro_apply, DualVector, GradedVector, PartitionState, SparseOperator, VOAContext,
};

/// `λ² = ξ² ε` for `λ = −ξ ε^{1/2}`.
pub fn lambda_sq_from_epsilon(epsilon: &ExactScalar, xi: &ExactScalar) -> ExactScalar {
    xi * xi * epsilon
}

/// `λ = −ξ ε^{1/2}` (principal root), when it is a Gaussian rational.
pub fn lambda_from_epsilon(epsilon: &ExactScalar, xi: &ExactScalar) -> Result<ExactScalar> {
    let root = epsilon
        .exact_sqrt()
        .ok_or_else(|| VoxError::NotExact(format!("square root of {epsilon}")))?;
    Ok(-(xi * &root))
}

/// Gram and dual blocks of `⟨·,·⟩_λ` on `V_{≤N}`.
#[derive(Debug)]
pub struct BilinearForm {
    lambda_sq: ExactScalar,
    basis: Vec<Vec<PartitionState>>,
    gram: Vec<Matrix>,
    dual: Vec<Matrix>,
    memo: RefCell<HashMap<(PartitionState, PartitionState), ExactScalar>>,
}

impl Clone for BilinearForm {
    fn clone(&self) -> Self {
        BilinearForm {
            lambda_sq: self.lambda_sq.clone(),
            basis: self.basis.clone(),
            gram: self.gram.clone(),
            dual: self.dual.clone(),
            memo: RefCell::new(HashMap::new()),
        }
    }
}

impl BilinearForm {
    /// Builds every block through weight `cutoff` from the adjoint relation and `⟨𝟏,𝟏⟩ = 1`.
    pub fn new(cutoff: u32, lambda_sq: ExactScalar) -> Result<Self> {
        if lambda_sq.is_zero() {
            return Err(VoxError::InvalidArgument("λ must be nonzero".into()));
        }
        let mut form = BilinearForm {
            lambda_sq,
            basis: Vec::new(),
            gram: Vec::new(),
            dual: Vec::new(),
            memo: RefCell::new(HashMap::new()),
        };
        for l in 0..=cutoff {
            let b = PartitionState::all_of_weight(l);
            let g: Matrix = b.iter().map(|p| b.iter().map(|q| form.basis_pairing(p, q)).collect()).collect();
            let d = linalg::inverse(&g).map_err(|_| VoxError::DegenerateForm(l))?;
            form.basis.push(b);
            form.gram.push(g);
            form.dual.push(d);
        }
        Ok(form)
    }

    pub fn with_lambda(cutoff: u32, lambda: &ExactScalar) -> Result<Self> {
        Self::new(cutoff, lambda * lambda)
    }

    pub fn from_epsilon(cutoff: u32, epsilon: &ExactScalar, xi: &ExactScalar) -> Result<Self> {
        Self::new(cutoff, lambda_sq_from_epsilon(epsilon, xi))
    }

    pub fn lambda_sq(&self) -> &ExactScalar {
        &self.lambda_sq
    }

    pub fn cutoff(&self) -> u32 {
        (self.basis.len() - 1) as u32
    }

    /// `⟨p, q⟩_λ` on basis states via `⟨a(−n)x, y⟩ = ⟨x, a(−n)† y⟩`,
    /// `a(−n)† = −(−λ²)^{−n} a(n)`.
    pub fn basis_pairing(&self, p: &PartitionState, q: &PartitionState) -> ExactScalar {
        if p.weight() != q.weight() || p.len() != q.len() {
            return ExactScalar::zero();
        }
        if p.is_vacuum() {
            return ExactScalar::one();
        }
        let key = (p.clone(), q.clone());
        if let Some(v) = self.memo.borrow().get(&key) {
            return v.clone();
        }
        let n = p.parts()[0];
        let cnt = q.count(n);
        let value = if cnt == 0 {
            ExactScalar::zero()
        } else {
            let x = p.without_part(n).expect("leading part");
            let y = q.without_part(n).expect("counted part");
            let adj = -(-&self.lambda_sq).powi(-(n as i64));
            adj.scale_int(&(BigInt::from(n) * BigInt::from(cnt))) * self.basis_pairing(&x, &y)
        };
        self.memo.borrow_mut().insert(key, value.clone());
        value
    }

    /// `⟨a, b⟩_λ`.
    pub fn form(&self, a: &GradedVector, b: &GradedVector) -> ExactScalar {
        let mut acc = ExactScalar::zero();
        for (p, cp) in a.terms() {
            for (q, cq) in b.terms() {
                if p.weight() == q.weight() {
                    let g = self.basis_pairing(p, q);
                    if !g.is_zero() {
                        acc += cp * cq * g;
                    }
                }
            }
        }
        acc
    }

    pub fn basis(&self, l: u32) -> &[PartitionState] {
        self.basis.get(l as usize).map_or(&[], |b| b.as_slice())
    }

    pub fn gram(&self, l: u32) -> Result<&Matrix> {
        self.gram.get(l as usize).ok_or_else(|| VoxError::CutoffOverflow(format!("weight {l}")))
    }

    /// `G_l^{-1}`.
    pub fn dual_matrix(&self, l: u32) -> Result<&Matrix> {
        self.dual.get(l as usize).ok_or_else(|| VoxError::CutoffOverflow(format!("weight {l}")))
    }

    /// `ū_β = Σ_α (G^{-1})_{αβ} u_α`, so that `⟨u_α, ū_β⟩_λ = δ_{αβ}`.
    pub fn dual_basis(&self, l: u32) -> Result<Vec<GradedVector>> {
        let d = self.dual_matrix(l)?;
        let b = self.basis(l);
        Ok((0..b.len())
            .map(|beta| GradedVector::from_terms(b.iter().enumerate().map(|(a, p)| (p.clone(), d[a][beta].clone()))))
            .collect())
    }

    /// Dual of an arbitrary basis of `V_l`.
    pub fn dual_of(&self, basis: &[GradedVector]) -> Result<Vec<GradedVector>> {
        let g: Matrix = basis.iter().map(|a| basis.iter().map(|b| self.form(a, b)).collect()).collect();
        let l = basis.first().and_then(|v| v.homogeneous_weight()).unwrap_or(0);
        let d = linalg::inverse(&g).map_err(|_| VoxError::DegenerateForm(l))?;
        Ok((0..basis.len())
            .map(|beta| {
                basis
                    .iter()
                    .enumerate()
                    .fold(GradedVector::zero(), |acc, (a, v)| acc.add(&v.scale(&d[a][beta])))
            })
            .collect())
    }

    /// The functional `⟨x̂, ·⟩_λ` representing a coordinate dual vector.
    pub fn represent(&self, w: &DualVector) -> Result<GradedVector> {
        let mut out = GradedVector::zero();
        for (p, c) in w.terms() {
            let l = p.weight();
            let d = self.dual_matrix(l)?;
            let b = self.basis(l);
            let col = b.iter().position(|q| q == p).expect("basis state");
            for (a, q) in b.iter().enumerate() {
                out.add_term(q.clone(), &(c * &d[a][col]));
            }
        }
        Ok(out)
    }

    /// `u†(n)` for homogeneous `u`, as an operator on `V_{≤N}`.
    pub fn adjoint_mode(&self, ctx: &VOAContext, u: &GradedVector, n: i64) -> Result<SparseOperator> {
        let w = u
            .homogeneous_weight()
            .ok_or_else(|| VoxError::InvalidArgument("adjoint of an inhomogeneous state".into()))? as i64;
        let ls = &self.lambda_sq;
        let mut acc = SparseOperator::zero(n + 1 - w);
        let mut lift = u.clone();
        let mut fact = ExactScalar::one();
        for j in 0..=w {
            if lift.is_zero() {
                break;
            }
            if j > 0 {
                fact = fact * ExactScalar::from_int(j);
            }
            let k = 2 * w - j - n - 2;
            let coef = ExactScalar::from_int(if j % 2 == 0 { 1 } else { -1 }) * ls.powi(w - j) * (-ls).powi(-k - 1)
                * fact.inv()?;
            let op = ctx.vertex_mode(&lift, k)?.scale(&coef);
            acc = acc.add(&op);
            lift = virasoro_apply(1, &lift);
        }
        Ok(acc)
    }

    /// `⟨w′, Y†(u,z) v⟩` two ways: through invariance, `⟨Y(u,z) ŵ, v⟩_λ`,
    /// and by substitution, `⟨w′, Y(e^{−zλ^{−2}L(1)} (−z/λ)^{−2L(0)} u, −λ²/z) v⟩`.
    pub fn adjoint_matrix_element(
        &self,
        wprime: &DualVector,
        u: &GradedVector,
        z: &ExactScalar,
        v: &GradedVector,
    ) -> Result<(ExactScalar, ExactScalar)> {
        if z.is_zero() {
            return Err(VoxError::PoleAtOrigin);
        }
        let hat = self.represent(wprime)?;
        let mut conj = ExactScalar::zero();
        for wu in u.weights() {
            let up = u.project(wu);
            for wh in hat.weights() {
                let hp = hat.project(wh);
                for wv in v.weights() {
                    let k = wu as i64 + wh as i64 - wv as i64 - 1;
                    let image = mode_apply(&up, k, &hp);
                    conj += self.form(&image, &v.project(wv)) * z.powi(-k - 1);
                }
            }
        }
        let ls = &self.lambda_sq;
        let mut moved = GradedVector::zero();
        for wu in u.weights() {
            let scale = (z * z * ls.inv()?).powi(-(wu as i64));
            let mut lift = u.project(wu).scale(&scale);
            let step = -(z * &ls.inv()?);
            let mut coef = ExactScalar::one();
            let mut j = 0i64;
            while !lift.is_zero() {
                moved = moved.add(&lift.scale(&coef));
                j += 1;
                coef = coef * &step * ExactScalar::ratio(1, j);
                lift = virasoro_apply(1, &lift);
            }
        }
        let subst = matrix_element(wprime, &moved, &(-(ls * &z.inv()?)), v)?;
        Ok((conj, subst))
    }
}

/// Invariance `⟨u(n)a, b⟩ = ⟨a, u†(n)b⟩` for the generator and conformal vector with
/// `|n| ≤ max_n` on states of weight `≤ max_weight`, the dual-basis resolution on
/// `V_l`, `l ≤ resolution_weight`, and orthogonality of distinct weights.
pub fn check_pairing(ctx: &VOAContext, form: &BilinearForm, max_weight: u32, max_n: i64, resolution_weight: u32) -> Report {
    let mut rep = Report::new();
    let states: Vec<GradedVector> = (0..=max_weight).flat_map(PartitionState::all_of_weight).map(GradedVector::basis).collect();
    let anchor = "modes are adjoint to their conjugates under the invariant form";
    for (name, u) in [("generator", GradedVector::generator()), ("conformal", GradedVector::conformal())] {
        for n in -max_n..=max_n {
            let id = format!("pairing.invariance.{name}.n{n:+}");
            let run = || -> Result<ExactScalar> {
                let m = ctx.vertex_mode(&u, n)?;
                let adj = form.adjoint_mode(ctx, &u, n)?;
                let mut worst = ExactScalar::zero();
                for a in &states {
                    let ma = m.apply(a);
                    for b in &states {
                        let d = form.form(&ma, b) - form.form(a, &adj.apply(b));
                        if !d.is_zero() {
                            worst = d;
                        }
                    }
                }
                Ok(worst)
            };
            match run() {
                Ok(r) => rep.push(Check::exact(&id, anchor, &r)),
                Err(e) => rep.push(Check::error(&id, anchor, &e)),
            }
        }
    }
    let anchor = "dual basis resolves the identity on each weight space";
    for l in 0..=resolution_weight {
        let id = format!("pairing.resolution.l{l}");
        let run = || -> Result<ExactScalar> {
            let duals = form.dual_basis(l)?;
            let mut worst = ExactScalar::zero();
            for (a, p) in form.basis(l).iter().enumerate() {
                let v = GradedVector::basis(p.clone());
                let mut rebuilt = GradedVector::zero();
                for (b, d) in duals.iter().enumerate() {
                    let c = form.form(&v, d);
                    let delta = if a == b { ExactScalar::one() } else { ExactScalar::zero() };
                    if c != delta {
                        worst = &c - delta;
                    }
                    rebuilt = rebuilt.add(&GradedVector::basis(form.basis(l)[b].clone()).scale(&c));
                }
                if let Some((_, c)) = rebuilt.sub(&v).terms().next() {
                    worst = c.clone();
                }
            }
            Ok(worst)
        };
        match run() {
            Ok(r) => rep.push(Check::exact(&id, anchor, &r)),
            Err(e) => rep.push(Check::error(&id, anchor, &e)),
        }
    }
    let mut worst = ExactScalar::zero();
    for a in &states {
        for b in &states {
            if a.homogeneous_weight() != b.homogeneous_weight() {
                let v = form.form(a, b);
                if !v.is_zero() {
                    worst = v;
                }
            }
        }
    }
    rep.push(Check::exact("pairing.orthogonality", "states of different weight are orthogonal", &worst));
    let norm = form.form(&GradedVector::vacuum(), &GradedVector::vacuum()) - ExactScalar::one();
    rep.push(Check::exact("pairing.normalization", "the vacuum has unit norm", &norm));
    rep
}

fn exp_nilpotent(ctx: &VOAContext, op: &SparseOperator, c: &ExactScalar) -> SparseOperator {
    let mut acc = SparseOperator::identity(ctx);
    let mut term = SparseOperator::identity(ctx);
    let mut j = 0i64;
    loop {
        j += 1;
        term = op.compose(&term).scale(&(c * ExactScalar::ratio(1, j)));
        if term.is_zero() {
            return acc;
        }
        acc = acc.add(&term);
    }
}

/// `T_λ = e^{λL(−1)} e^{λ^{−1}L(1)} e^{λL(−1)}` on the truncated space.
pub fn t_lambda_operator(ctx: &VOAContext, lambda: &ExactScalar) -> Result<SparseOperator> {
    let lm1 = ctx.virasoro(-1);
    let lp1 = ctx.virasoro(1);
    let outer = exp_nilpotent(ctx, &lm1, lambda);
    let middle = exp_nilpotent(ctx, &lp1, &lambda.inv()?);
    Ok(outer.compose(&middle).compose(&outer))
}

/// `T_λ^{−1} = e^{−λL(−1)} e^{−λ^{−1}L(1)} e^{−λL(−1)}`.
pub fn t_lambda_inverse_operator(ctx: &VOAContext, lambda: &ExactScalar) -> Result<SparseOperator> {
    let lm1 = ctx.virasoro(-1);
    let lp1 = ctx.virasoro(1);
    let outer = exp_nilpotent(ctx, &lm1, &-lambda);
    let middle = exp_nilpotent(ctx, &lp1, &-lambda.inv()?);
    Ok(outer.compose(&middle).compose(&outer))
}

/// `T_λ v`; the truncated exponentials terminate because `L(±1)` are nilpotent on `V_{≤N}`.
pub fn t_lambda(ctx: &VOAContext, v: &GradedVector, lambda: &ExactScalar) -> Result<GradedVector> {
    if v.max_weight() > ctx.cutoff() {
        return Err(VoxError::CutoffOverflow(format!("weight {} above cutoff {}", v.max_weight(), ctx.cutoff())));
    }
    Ok(t_lambda_operator(ctx, lambda)?.apply(v))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(p: i64, q: i64) -> ExactScalar {
        ExactScalar::ratio(p, q)
    }

    #[test]
    fn normalization_and_orthogonality() {
        let f = BilinearForm::new(4, ExactScalar::one()).unwrap();
        assert_eq!(f.form(&GradedVector::vacuum(), &GradedVector::vacuum()), ExactScalar::one());
        assert!(f.form(&GradedVector::generator(), &GradedVector::from_modes(&[2])).is_zero());
        // ⟨a, a⟩_λ = −(−1)·λ^{−2} = λ^{−2}
        let g = BilinearForm::new(4, r(-1, 16)).unwrap();
        assert_eq!(g.form(&GradedVector::generator(), &GradedVector::generator()), r(-16, 1));
    }

    #[test]
    fn dual_resolution() {
        let f = BilinearForm::new(4, r(-1, 16)).unwrap();
        for l in 0..=4 {
            let duals = f.dual_basis(l).unwrap();
            for (a, p) in f.basis(l).iter().enumerate() {
                for (b, d) in duals.iter().enumerate() {
                    let v = f.form(&GradedVector::basis(p.clone()), d);
                    assert_eq!(v, if a == b { ExactScalar::one() } else { ExactScalar::zero() });
                }
            }
        }
    }

    #[test]
    fn invariance_for_generator_and_conformal_modes() {
        let ctx = VOAContext::build_heisenberg(6);
        let f = BilinearForm::new(6, r(3, 2)).unwrap();
        for u in [GradedVector::generator(), GradedVector::conformal()] {
            for n in -3..=3 {
                let m = ctx.vertex_mode(&u, n).unwrap();
                let adj = f.adjoint_mode(&ctx, &u, n).unwrap();
                for a in (0..=3).flat_map(PartitionState::all_of_weight) {
                    for b in (0..=3).flat_map(PartitionState::all_of_weight) {
                        let (av, bv) = (GradedVector::basis(a.clone()), GradedVector::basis(b.clone()));
                        assert_eq!(f.form(&m.apply(&av), &bv), f.form(&av, &adj.apply(&bv)), "n={n} {a:?} {b:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn adjoint_two_ways() {
        let f = BilinearForm::new(6, ExactScalar::one()).unwrap();
        let a = GradedVector::generator();
        let w = DualVector::coordinate(PartitionState::new(vec![1, 1]));
        let (c, s) = f.adjoint_matrix_element(&w, &a, &r(2, 1), &a).unwrap();
        assert_eq!(c, s);
        assert!(!c.is_zero());
        let (c, s) = f.adjoint_matrix_element(&w, &GradedVector::vacuum(), &r(2, 1), &GradedVector::from_modes(&[1, 1])).unwrap();
        assert_eq!((c.clone(), s), (ExactScalar::one(), ExactScalar::one()));
    }

    #[test]
    fn pairing_report() {
        let ctx = VOAContext::build_heisenberg(6);
        let f = BilinearForm::new(6, r(-1, 16)).unwrap();
        let rep = check_pairing(&ctx, &f, 3, 3, 4);
        assert!(rep.all_pass(), "{:?}", rep.failures());
        assert_eq!(rep.checks.len(), 14 + 5 + 2);
    }

    #[test]
    fn t_lambda_roundtrip() {
        let ctx = VOAContext::build_heisenberg(5);
        let lam = r(1, 3);
        let t = t_lambda_operator(&ctx, &lam).unwrap();
        let ti = t_lambda_inverse_operator(&ctx, &lam).unwrap();
        for p in ctx.all_basis() {
            let v = GradedVector::basis(p.clone());
            assert_eq!(t.apply(&ti.apply(&v)), v);
        }
        assert_eq!(t_lambda(&ctx, &GradedVector::vacuum(), &lam).unwrap(), GradedVector::vacuum());
    }
}
