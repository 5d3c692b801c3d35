//! Cochains of composable forms: coboundary, shuffle relations, products and
//! the Leibniz rule, plus the low-degree exceptional complex.

use std::cmp::Ordering;

use num_rational::BigRational;
use num_traits::Zero;

use crate::error::{Result, VoxError};
use crate::forms::{
    check_l0_conjugation, check_lminus1_property, composability_series_j, eval, permutation_sign, series_correlator,
    ConvergenceReport, Estimate, EvalMode, EvalOptions, FormKind, Outer, Side, SlotInput, WForm,
};
use crate::product::{eval_product, pole_structure, EpsProductSpec, PairingMode, ProductSpec, RightChart};
use crate::report::{Check, Report};
use crate::scalars::{ApproxScalar, ExactScalar, Precision};
use crate::sewing::SphereConfig;
use crate::voa::{DualVector, GradedVector, LevelSeries};

/// An `n`-point form that composes with `m` further vertex operators.
#[derive(Clone, Debug)]
pub struct Cochain {
    pub form: WForm,
    pub composable: u32,
    symmetry_checked: bool,
}

impl Cochain {
    pub fn new(form: WForm, composable: u32) -> Self {
        Cochain { form, composable, symmetry_checked: false }
    }

    /// `⟨w′, Y(v₁,z₁)…Y(vₙ,zₙ) tail⟩`.
    pub fn correlator(states: Vec<GradedVector>, tail: GradedVector, composable: u32, level: u32) -> Self {
        Cochain::new(WForm::correlator(states, tail, level), composable)
    }

    pub fn arity(&self) -> usize {
        self.form.arity()
    }

    /// `(n, m)`.
    pub fn bidegree(&self) -> (usize, u32) {
        (self.arity(), self.composable)
    }

    pub fn symmetry_checked(&self) -> bool {
        self.symmetry_checked
    }

    pub fn value(&self, wprime: &DualVector, points: &[ExactScalar]) -> Result<ExactScalar> {
        self.form.value(wprime, points)
    }

    /// Translation, grading and shuffle checks at one configuration; records whether the shuffles vanish.
    pub fn verify(&mut self, wprime: &DualVector, points: &[ExactScalar]) -> Report {
        let mut rep = Report::new();
        for i in 0..self.arity() {
            rep.extend(check_lminus1_property(&self.form, wprime, points, i));
        }
        rep.extend(check_l0_conjugation(&self.form, wprime, &ExactScalar::from_int(2), points));
        let mut shuffles = Report::new();
        for s in 1..self.arity().max(1) {
            shuffles.extend(shuffle_check(self, s, wprime, points));
        }
        self.symmetry_checked = shuffles.all_pass();
        rep.extend(shuffles);
        rep
    }
}

/// `δc` on `states` (one more than the arity of `c`); needs `m ≥ 1`.
pub fn coboundary(c: &Cochain, states: Vec<GradedVector>) -> Result<Cochain> {
    if c.composable == 0 {
        return Err(VoxError::InvalidArgument("the coboundary needs a composable form (m >= 1)".into()));
    }
    if states.len() != c.arity() + 1 {
        return Err(VoxError::InvalidArgument(format!("{} states for the coboundary of a {}-point form", states.len(), c.arity())));
    }
    let form = WForm::new(c.form.kind.clone().coboundary(), states, c.form.level);
    let out = Cochain::new(form, c.composable - 1);
    debug_assert_eq!(out.bidegree(), (c.arity() + 1, c.composable - 1));
    Ok(out)
}

/// `δc` evaluated at `points` with `extra` appended to the states of `c`.
pub fn coboundary_value(c: &Cochain, extra: &GradedVector, wprime: &DualVector, points: &[ExactScalar]) -> Result<ExactScalar> {
    let mut states = c.form.states();
    states.push(extra.clone());
    coboundary(c, states)?.value(wprime, points)
}

fn modulus(x: &ExactScalar, prec: Precision) -> ApproxScalar {
    ApproxScalar::from_exact(x, prec).abs()
}

/// `δ(δc)` exactly and as a certified series; `extra` supplies the two added states.
pub fn delta_squared_check(c: &Cochain, extra: &[GradedVector; 2], wprime: &DualVector, points: &[ExactScalar]) -> Report {
    let mut rep = Report::new();
    let anchor = "the coboundary squares to zero";
    let mut states = c.form.states();
    states.push(extra[0].clone());
    let once = match coboundary(c, states.clone()) {
        Ok(x) => x,
        Err(e) => {
            rep.push(Check::error("complex.delta_squared.exact", anchor, &e));
            return rep;
        }
    };
    states.push(extra[1].clone());
    let twice = match coboundary(&once, states) {
        Ok(x) => x,
        Err(e) => {
            rep.push(Check::error("complex.delta_squared.exact", anchor, &e));
            return rep;
        }
    };
    rep.push(Check::predicate(
        "complex.delta_squared.bidegree",
        "the coboundary raises the arity and lowers composability by one",
        twice.bidegree() == (c.arity() + 2, c.composable - 2),
    ));
    rep.push_result(
        "complex.delta_squared.exact",
        anchor,
        twice.form.eval(wprime, points, EvalMode::Exact).map(|e| Check::exact("complex.delta_squared.exact", anchor, &e.value)),
    );
    let prec = Precision::from_env();
    rep.push_result(
        "complex.delta_squared.series",
        "the coboundary squares to zero with grouped insertions expanded",
        twice.form.eval(wprime, points, EvalMode::Series).map(|e| {
            Check::bounded("complex.delta_squared.series", "the coboundary squares to zero with grouped insertions expanded", &modulus(&e.value, prec), &e.bound)
        }),
    );
    rep
}

/// Permutations with `σ(0)<…<σ(s−1)` and `σ(s)<…<σ(n−1)`.
pub fn shuffles(n: usize, s: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, left: usize, acc: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if left == 0 {
            let mut sigma = acc.clone();
            sigma.extend((0..n).filter(|j| !acc.contains(j)));
            out.push(sigma);
            return;
        }
        for j in start..n {
            acc.push(j);
            rec(j + 1, n, left - 1, acc, out);
            acc.pop();
        }
    }
    let mut out = Vec::new();
    if s <= n {
        rec(0, n, s, &mut Vec::new(), &mut out);
    }
    out
}

/// `Σ_σ (−1)^σ F(x_{σ(1)},…,x_{σ(n)})` over `(s, n−s)` shuffles.
fn shuffle_sum(n: usize, s: usize, value: &dyn Fn(&[usize]) -> Result<ExactScalar>) -> Result<ExactScalar> {
    let mut acc = ExactScalar::zero();
    for sigma in shuffles(n, s) {
        let v = value(&sigma)?;
        acc += if permutation_sign(&sigma)? < 0 { -v } else { v };
    }
    Ok(acc)
}

/// Signed shuffle sum of `c` at one configuration, which vanishes for a symmetric cochain.
pub fn shuffle_check(c: &Cochain, s: usize, wprime: &DualVector, points: &[ExactScalar]) -> Report {
    let mut rep = Report::new();
    let n = c.arity();
    let id = format!("complex.shuffle.n{n}.s{s}");
    let anchor = "signed sums over shuffles of the cochain vanish";
    if n < 2 || s == 0 || s >= n {
        rep.push(Check::skip(&id, anchor, "no proper shuffle for this arity"));
        return rep;
    }
    let r = (|| -> Result<Check> {
        let inputs = c.form.inputs(points)?;
        let opts = c.form.options(EvalMode::Exact);
        let total = shuffle_sum(n, s, &|sigma| {
            let kind = c.form.kind.clone().permuted(sigma.to_vec());
            Ok(eval(&kind, &opts, wprime, &[], &inputs)?.value)
        })?;
        Ok(Check::exact(&id, anchor, &total))
    })();
    rep.push_result(&id, anchor, r);
    rep
}

/// Sewing data shared by every product in a Leibniz comparison.
#[derive(Clone, Debug)]
pub struct ProductSetup {
    pub cfg: SphereConfig,
    pub lmax: u32,
    pub pairing: PairingMode,
}

impl ProductSetup {
    pub fn new(cfg: SphereConfig, lmax: u32) -> Self {
        ProductSetup { cfg, lmax, pairing: PairingMode::default_xi() }
    }

    pub fn spec(&self, c1: &Cochain, c2: &Cochain) -> EpsProductSpec {
        let mut spec = EpsProductSpec::new(c1.form.clone(), c2.form.clone(), self.cfg.clone(), self.lmax);
        spec.pairing = self.pairing.clone();
        spec
    }
}

/// `c₁ ·_ε c₂` in global coordinates, of bidegree `(k+n, m+m′)`.
pub fn cochain_product(c1: &Cochain, c2: &Cochain, setup: &ProductSetup) -> Result<Cochain> {
    let form = setup.spec(c1, c2).as_form(RightChart::Sewn)?;
    let out = Cochain::new(form, c1.composable + c2.composable);
    debug_assert_eq!(out.bidegree(), (c1.arity() + c2.arity(), c1.composable + c2.composable));
    Ok(out)
}

/// Shuffle sums of the resummed product, read off its rational reconstruction over `sweep`.
pub fn product_shuffle_check(c1: &Cochain, c2: &Cochain, setup: &ProductSetup, wprime: &DualVector, sweep: &[Vec<ExactScalar>], at: &[Vec<ExactScalar>]) -> Report {
    let mut rep = Report::new();
    let n = c1.arity() + c2.arity();
    let anchor = "signed shuffle sums of the resummed product vanish";
    let recon = match pole_structure(&setup.spec(c1, c2), wprime, sweep) {
        Ok(r) => r,
        Err(e) => {
            rep.push(Check::error("complex.product_shuffle", anchor, &e));
            return rep;
        }
    };
    for s in 1..n {
        for (k, pts) in at.iter().enumerate() {
            let id = format!("complex.product_shuffle.s{s}.cfg{k}");
            let total = shuffle_sum(n, s, &|sigma| {
                let moved: Vec<ExactScalar> = sigma.iter().map(|&j| pts[j].clone()).collect();
                recon.eval(&moved)
            });
            rep.push_result(&id, anchor, total.map(|t| Check::exact(&id, anchor, &t)));
        }
    }
    rep
}

/// Per-term level series of a signed sum, with its certified total.
struct SignedSeries {
    total: LevelSeries,
    tail: ApproxScalar,
}

impl SignedSeries {
    fn new(prec: Precision) -> Self {
        SignedSeries { total: LevelSeries::zeros(0), tail: ApproxScalar::zero(prec) }
    }

    fn push(&mut self, sign: i32, terms: &LevelSeries, prec: Precision) -> Result<()> {
        let cert = terms.certify(prec)?;
        self.total = self.total.add(&terms.scale(&ExactScalar::from_int(sign as i64)));
        self.tail = self.tail.add(&cert.tail);
        Ok(())
    }
}

fn product_terms(spec: &ProductSpec, opts: &EvalOptions, wprime: &DualVector, outer: &[Outer], inputs: &[SlotInput]) -> Result<LevelSeries> {
    Ok(eval_product(spec, opts, wprime, outer, inputs)?.terms)
}

/// `δ(c₁·c₂) − (δc₁)·c₂ − (−1)^k c₁·(δc₂)` at one configuration with one state per slot;
/// `flip_sign` negates the last term.
pub fn leibniz_residual(
    c1: &Cochain,
    c2: &Cochain,
    setup: &ProductSetup,
    wprime: &DualVector,
    states: &[GradedVector],
    points: &[ExactScalar],
    flip_sign: bool,
) -> Result<Estimate> {
    let prec = Precision::from_env();
    let (k, n) = (c1.arity(), c2.arity());
    if points.len() != k + n + 1 || states.len() != k + n + 1 {
        return Err(VoxError::InvalidArgument(format!("{} points and {} states for a Leibniz check of arity {}", points.len(), states.len(), k + n + 1)));
    }
    let base = setup.spec(c1, c2).kind_spec(RightChart::Sewn)?;
    let opts = EvalOptions { level: setup.lmax, mode: EvalMode::Exact, prec };
    let inputs: Vec<SlotInput> = states.iter().zip(points).map(|(v, z)| SlotInput::plain(v.clone(), z.clone())).collect();

    let mut acc = SignedSeries::new(prec);
    let last = k + n;
    acc.push(1, &product_terms(&base, &opts, wprime, &[Outer::new(inputs[0].clone(), Side::Left)], &inputs[1..])?, prec)?;
    for i in 0..last {
        let mut merged: Vec<SlotInput> = inputs[..i].to_vec();
        merged.push(SlotInput::merge(inputs[i].clone(), inputs[i + 1].clone()));
        merged.extend_from_slice(&inputs[i + 2..]);
        let sign = if i % 2 == 0 { -1 } else { 1 };
        acc.push(sign, &product_terms(&base, &opts, wprime, &[], &merged)?, prec)?;
    }
    let sign = if last % 2 == 0 { -1 } else { 1 };
    acc.push(sign, &product_terms(&base, &opts, wprime, &[Outer::new(inputs[last].clone(), Side::Right)], &inputs[..last])?, prec)?;

    let left_cob = ProductSpec { left: c1.form.kind.clone().coboundary(), left_arity: k + 1, ..base.clone() };
    acc.push(-1, &product_terms(&left_cob, &opts, wprime, &[], &inputs)?, prec)?;
    let right_cob = ProductSpec { right: c2.form.kind.clone().coboundary(), ..base };
    let mut sign = if k % 2 == 0 { -1 } else { 1 };
    if flip_sign {
        sign = -sign;
    }
    acc.push(sign, &product_terms(&right_cob, &opts, wprime, &[], &inputs)?, prec)?;
    Ok(Estimate { value: acc.total.partial_sum(), bound: acc.tail })
}

/// The Leibniz rule at each configuration, bounded by the summed level tails.
pub fn leibniz_check(
    c1: &Cochain,
    c2: &Cochain,
    setup: &ProductSetup,
    wprime: &DualVector,
    states: &[GradedVector],
    configurations: &[Vec<ExactScalar>],
    flip_sign: bool,
) -> Report {
    let mut rep = Report::new();
    let prec = Precision::from_env();
    let anchor = "the coboundary is a graded derivation of the product";
    for (j, pts) in configurations.iter().enumerate() {
        let id = format!("complex.leibniz.k{}n{}.cfg{j}", c1.arity(), c2.arity());
        let r = leibniz_residual(c1, c2, setup, wprime, states, pts, flip_sign).map(|e| Check::bounded(&id, anchor, &modulus(&e.value, prec), &e.bound));
        rep.push_result(&id, anchor, r);
    }
    rep
}

/// Exact point on the unit circle, `((1−t²) + 2ti)/(1+t²)`.
fn unit_point(t: &BigRational) -> ExactScalar {
    let one = BigRational::from_integer(1.into());
    let den = &one + t * t;
    ExactScalar::new((&one - t * t) / &den, (BigRational::from_integer(2.into()) * t) / &den)
}

/// Configurations of `k + n + 1` points whose distances from `−ζ₁` shrink from left to right slots:
/// the first `k` far out, slot `k` in between, the rest close to the puncture.
pub fn leibniz_configurations(k: usize, n: usize, zeta1: &ExactScalar, count: usize, seed: u64) -> Vec<Vec<ExactScalar>> {
    let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    let mut next = |m: u64| {
        s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (s >> 33) % m
    };
    let mut out = Vec::new();
    while out.len() < count {
        let mut pts = Vec::new();
        for j in 0..=k + n {
            let (lo, span, den) = if j < k {
                (20, 8, 4)
            } else if j == k {
                (10, 4, 8)
            } else {
                (8, 4, 32)
            };
            let rho = BigRational::new(((lo + next(span)) as i64).into(), den.into());
            let t = BigRational::new((next(41) as i64 - 20).into(), 8.into());
            pts.push(ExactScalar::real(rho) * unit_point(&t) - zeta1);
        }
        let distinct = (0..pts.len()).all(|i| (0..i).all(|j| pts[i] != pts[j]));
        if distinct {
            out.push(pts);
        }
    }
    out
}

/// Which exceptional combination to form.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExceptionalTerm {
    /// Outer insertion of the first state against a projected pair about `ζ`.
    First,
    /// Projected pair about `ζ` of the first two states with the third outside.
    Second,
}

/// Level series of an exceptional combination for a correlator-built two-point cochain.
pub fn exceptional_g(
    c: &Cochain,
    which: ExceptionalTerm,
    third: &GradedVector,
    points: &[ExactScalar; 3],
    zeta: &ExactScalar,
    wprime: &DualVector,
) -> Result<ConvergenceReport> {
    let prec = Precision::from_env();
    let Some(tail) = c.form.tail() else {
        return Err(VoxError::InvalidArgument("exceptional terms need a correlator-built cochain".into()));
    };
    if c.arity() != 2 {
        return Err(VoxError::InvalidArgument("exceptional terms act on two-point cochains".into()));
    }
    let mut states = c.form.states();
    states.push(third.clone());
    let plain = |i: usize| SlotInput::plain(states[i].clone(), points[i].clone());
    let shifted = |i: usize| &points[i] - zeta;
    let (projected, grouped) = match which {
        ExceptionalTerm::First => {
            let inner = WForm::correlator(vec![states[1].clone(), states[2].clone()], tail.clone(), c.form.level);
            let j = composability_series_j(&inner, &[(states[0].clone(), points[0].clone())], &[shifted(1), shifted(2)], wprime)?;
            let group = SlotInput::group(vec![plain(1), plain(2)], zeta.clone());
            (j, series_correlator(wprime, tail, &[plain(0), group], c.form.level, prec)?)
        }
        ExceptionalTerm::Second => {
            let inner = WForm::correlator(vec![states[0].clone(), states[1].clone()], tail.clone(), c.form.level);
            let j = composability_series_j(&inner, &[(states[2].clone(), points[2].clone())], &[shifted(0), shifted(1)], wprime)?;
            let group = SlotInput::group(vec![plain(0), plain(1)], zeta.clone());
            (j, series_correlator(wprime, tail, &[group, plain(2)], c.form.level, prec)?)
        }
    };
    let total = LevelSeries::from_levels(projected.levels.clone()).add(&grouped);
    let mut report = ConvergenceReport::from_series(&total, prec);
    report.checks = projected.checks;
    Ok(report)
}

/// Whether the projected and grouped pieces of an exceptional combination both converge at these points.
pub fn exceptional_region(which: ExceptionalTerm, points: &[ExactScalar; 3], zeta: &ExactScalar) -> bool {
    let d = |a: &ExactScalar, b: &ExactScalar| (a - b).norm_sqr();
    let (outside, pair) = match which {
        ExceptionalTerm::First => (0, [1, 2]),
        ExceptionalTerm::Second => (2, [0, 1]),
    };
    let spread = pair.iter().map(|&i| d(&points[i], zeta)).max().expect("two members");
    let front = points[outside].norm_sqr();
    let projected = pair.iter().all(|&i| front > d(&points[i], zeta));
    projected && d(&points[outside], zeta).cmp(&spread) == Ordering::Greater
}

/// The region inequalities exactly as stated for the two groups: `|z₁−ζ| > |z₂−ζ| > 0` for
/// the first and `|ζ−z₃| > |z₁−ζ|`, `|z₂−ζ| > 0` for the second. Unlike [`exceptional_region`]
/// they do not control the outer expansion, so points inside may still diverge.
pub fn stated_region(which: ExceptionalTerm, points: &[ExactScalar; 3], zeta: &ExactScalar) -> bool {
    let d = |a: &ExactScalar| (a - zeta).norm_sqr();
    let near = d(&points[1]);
    let positive = near > BigRational::zero();
    match which {
        ExceptionalTerm::First => positive && d(&points[0]) > near,
        ExceptionalTerm::Second => positive && d(&points[2]) > d(&points[0]),
    }
}

/// Separate group centres for the two merged pairs of the exceptional coboundary.
#[derive(Clone, Debug)]
pub struct PairCentres {
    pub first: ExactScalar,
    pub second: ExactScalar,
}

/// The exceptional coboundary of a two-point form:
/// `F(v₂,v₃) composed with Y(v₁) − F(v₁v₂ about ζ, v₃) + F(v₁, v₂v₃ about ζ′) − Y(v₃) composed with F(v₁,v₂)`.
pub fn delta_ex(kind: &FormKind, opts: &EvalOptions, wprime: &DualVector, inputs: &[SlotInput; 3], centres: &PairCentres) -> Result<Estimate> {
    let [a, b, c] = inputs;
    let t1 = eval(kind, opts, wprime, &[Outer::new(a.clone(), Side::Left)], &[b.clone(), c.clone()])?;
    let t2 = eval(kind, opts, wprime, &[], &[SlotInput::group(vec![a.clone(), b.clone()], centres.first.clone()), c.clone()])?;
    let t3 = eval(kind, opts, wprime, &[], &[a.clone(), SlotInput::group(vec![b.clone(), c.clone()], centres.second.clone())])?;
    let t4 = eval(kind, opts, wprime, &[Outer::new(c.clone(), Side::Right)], &[a.clone(), b.clone()])?;
    Ok(t1.sub(&t2).add(&t3).sub(&t4))
}

/// `δ_ex(δc)` for a one-point cochain, exactly, as a series, and across two choices of centres.
pub fn delta_ex_check(
    c: &Cochain,
    states: &[GradedVector; 3],
    points: &[ExactScalar; 3],
    centres: &[PairCentres; 2],
    wprime: &DualVector,
) -> Report {
    let mut rep = Report::new();
    let prec = Precision::from_env();
    let anchor = "the exceptional coboundary annihilates coboundaries";
    if c.arity() != 1 {
        rep.push(Check::error("complex.delta_ex.exact", anchor, &VoxError::InvalidArgument("a one-point cochain is required".into())));
        return rep;
    }
    if c.composable < 2 {
        rep.push(Check::error("complex.delta_ex.exact", anchor, &VoxError::InvalidArgument("two composable insertions are required".into())));
        return rep;
    }
    let kind = c.form.kind.clone().coboundary();
    let inputs = [0, 1, 2].map(|i| SlotInput::plain(states[i].clone(), points[i].clone()));
    let exact = delta_ex(&kind, &EvalOptions { level: c.form.level, mode: EvalMode::Exact, prec }, wprime, &inputs, &centres[0]);
    rep.push_result("complex.delta_ex.exact", anchor, exact.map(|e| Check::exact("complex.delta_ex.exact", anchor, &e.value)));
    let series_anchor = "the exceptional coboundary annihilates coboundaries with grouped insertions expanded";
    let opts = EvalOptions { level: c.form.level, mode: EvalMode::Series, prec };
    let series: Vec<Result<Estimate>> = centres.iter().map(|z| delta_ex(&kind, &opts, wprime, &inputs, z)).collect();
    for (j, s) in series.iter().enumerate() {
        let id = format!("complex.delta_ex.series{j}");
        rep.push_result(&id, series_anchor, s.clone().map(|e| Check::bounded(&id, series_anchor, &modulus(&e.value, prec), &e.bound)));
    }
    let centre_anchor = "the exceptional coboundary does not depend on the group centres";
    let independence = match (&series[0], &series[1]) {
        (Ok(a), Ok(b)) => Ok(Check::bounded("complex.delta_ex.centres", centre_anchor, &modulus(&(&a.value - &b.value), prec), &a.bound.add(&b.bound))),
        (Err(e), _) | (_, Err(e)) => Err(e.clone()),
    };
    rep.push_result("complex.delta_ex.centres", centre_anchor, independence);
    rep
}
