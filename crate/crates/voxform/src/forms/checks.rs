//! Structural properties of forms: translation, scaling, relabeling, composability.

use super::estimate::Estimate;
use super::eval::{certified, eval, exact_correlator, series_correlator, EvalMode, EvalOptions, FormKind};
use super::input::{lminus1_transpose, translate_dual, SlotInput};
use super::rational::{reconstruct_rational, PoleAnsatz, RationalReconstruction, UnivariateRational};
use super::region::{Constraint, Gap};
use super::wform::WForm;
use crate::error::{Result, VoxError};
use crate::product::CauchyEstimate;
use crate::report::{Check, Report};
use crate::scalars::{ApproxScalar, ExactScalar, Precision};
use crate::voa::{
    correlator_series, is_vacuum_multiple, mode_apply, radial_sort, virasoro_apply, DualVector, GradedVector, Insertion,
    LevelSeries, PartitionState, VOAContext,
};

/// Level coefficients of a truncated expansion with its decay certificate.
#[derive(Clone, Debug)]
pub struct ConvergenceReport {
    pub levels: Vec<ExactScalar>,
    pub value: ExactScalar,
    pub ratio: Option<ApproxScalar>,
    pub tail: Option<ApproxScalar>,
    pub cauchy: Option<CauchyEstimate>,
    pub checks: Report,
}

impl ConvergenceReport {
    pub fn from_series(series: &LevelSeries, prec: Precision) -> Self {
        let cert = series.certify(prec).ok();
        ConvergenceReport {
            levels: series.levels().to_vec(),
            value: series.partial_sum(),
            ratio: cert.as_ref().map(|c| c.ratio.clone()),
            tail: cert.map(|c| c.tail),
            cauchy: None,
            checks: Report::new(),
        }
    }

    pub fn certified(&self) -> bool {
        self.tail.is_some()
    }
}

fn modulus(x: &ExactScalar, prec: Precision) -> ApproxScalar {
    ApproxScalar::from_exact(x, prec).abs()
}

/// Level series of `⟨w′, E⁽ⁿ⁾(v₁,z₁;…;vₙ,zₙ; w)⟩` with insertions taken in radial order.
pub fn eval_e_series(wform: &WForm, wprime: &DualVector, points: &[ExactScalar], u_tail: &GradedVector) -> Result<LevelSeries> {
    let inputs = wform.inputs(points)?;
    let states: Vec<(GradedVector, ExactScalar)> = inputs.iter().flat_map(SlotInput::leaves).collect();
    let sorted = radial_sort(&states)?;
    let ins: Vec<Insertion> = sorted.into_iter().map(|(v, z)| Insertion::plain(v, z)).collect();
    correlator_series(wprime, &ins, u_tail, wform.level)
}

/// Partial sum at level `L` of the `n`-point correlator with tail `u_tail`.
pub fn eval_e(wform: &WForm, wprime: &DualVector, points: &[ExactScalar], u_tail: &GradedVector) -> Result<ExactScalar> {
    Ok(eval_e_series(wform, wprime, points, u_tail)?.partial_sum())
}

/// `e^{ζL(−1)} Y(v, −ζ) w` projected to weights `≤ N`, computed exactly.
pub fn eval_intertwining(ctx: &VOAContext, w: &GradedVector, zeta: &ExactScalar, v: &GradedVector) -> Result<GradedVector> {
    if zeta.is_zero() {
        return Err(VoxError::PoleAtOrigin);
    }
    let cutoff = ctx.cutoff();
    if w.max_weight() > cutoff || v.max_weight() > cutoff {
        return Err(VoxError::CutoffOverflow(format!("input weight above cutoff {cutoff}")));
    }
    let minus = -zeta;
    let mut field = GradedVector::zero();
    for wv in v.weights() {
        for ww in w.weights() {
            for r in 0..=cutoff {
                let k = wv as i64 + ww as i64 - r as i64 - 1;
                let image = mode_apply(&v.project(wv), k, &w.project(ww));
                field = field.add(&image.scale(&minus.powi(-k - 1)));
            }
        }
    }
    let mut acc = field.clone();
    let mut term = field;
    let mut j = 0i64;
    loop {
        j += 1;
        term = virasoro_apply(-1, &term).truncate(cutoff).scale(&(zeta * &ExactScalar::ratio(1, j)));
        if term.is_zero() {
            return Ok(acc);
        }
        acc = acc.add(&term);
    }
}

/// Applies `f` to the tail of every correlator inside a kind; products are left alone.
fn map_tails(kind: &FormKind, f: &dyn Fn(&GradedVector) -> GradedVector) -> Option<FormKind> {
    Some(match kind {
        FormKind::Correlator { tail } => FormKind::Correlator { tail: f(tail) },
        FormKind::Coboundary(inner) => FormKind::Coboundary(Box::new(map_tails(inner, f)?)),
        FormKind::Permuted { sigma, inner } => FormKind::Permuted { sigma: sigma.clone(), inner: Box::new(map_tails(inner, f)?) },
        FormKind::Combination(terms) => {
            FormKind::Combination(terms.iter().map(|(k, t)| Some((k.clone(), map_tails(t, f)?))).collect::<Option<_>>()?)
        }
        FormKind::Product(_) => return None,
    })
}

fn all_tails_vacuum(kind: &FormKind) -> bool {
    match kind {
        FormKind::Correlator { tail } => is_vacuum_multiple(tail),
        FormKind::Coboundary(inner) | FormKind::Permuted { inner, .. } => all_tails_vacuum(inner),
        FormKind::Combination(terms) => terms.iter().all(|(_, t)| all_tails_vacuum(t)),
        FormKind::Product(_) => false,
    }
}

/// Nearby sample values `z + δ_k` avoiding the listed points.
fn sample_offsets(center: &ExactScalar, avoid: &[ExactScalar], count: usize) -> Vec<ExactScalar> {
    let mut out = Vec::new();
    let mut k = 1i64;
    while out.len() < count {
        let sign = if k % 2 == 0 { -1 } else { 1 };
        let t = center + &ExactScalar::ratio(sign * k, 97);
        if !avoid.contains(&t) && !t.is_zero() {
            out.push(t);
        }
        k += 1;
    }
    out
}

/// `z ↦ F(…, v_i at z, …)` reconstructed from exact samples near `points[i]`.
pub fn slot_function(wform: &WForm, wprime: &DualVector, points: &[ExactScalar], i: usize) -> Result<UnivariateRational> {
    let wt_i = wform.slots[i].state.max_weight();
    let mut poles: Vec<(ExactScalar, u32)> = Vec::new();
    for (j, z) in points.iter().enumerate() {
        if j != i {
            poles.push((z.clone(), wt_i + wform.slots[j].state.max_weight()));
        }
    }
    let tail_wt = match wform.tail() {
        Some(t) if is_vacuum_multiple(t) => None,
        Some(t) => Some(t.max_weight()),
        None if all_tails_vacuum(&wform.kind) => None,
        None => Some(wform.slots.iter().map(|s| s.state.max_weight()).sum::<u32>() + 4),
    };
    if let Some(tw) = tail_wt {
        poles.push((ExactScalar::zero(), wt_i + tw));
    }
    slot_function_with(wform, wprime, points, i, poles)
}

/// As [`slot_function`] with an explicit pole list.
pub fn slot_function_with(
    wform: &WForm,
    wprime: &DualVector,
    points: &[ExactScalar],
    i: usize,
    poles: Vec<(ExactScalar, u32)>,
) -> Result<UnivariateRational> {
    let order: u32 = poles.iter().map(|p| p.1).sum();
    let degree_room = order + wprime.max_weight() + 4;
    let holdout = 3;
    let avoid: Vec<ExactScalar> = poles.iter().map(|p| p.0.clone()).collect();
    let ts = sample_offsets(&points[i], &avoid, degree_room as usize + 1 + holdout);
    let mut samples = Vec::new();
    for t in ts {
        let mut pts = points.to_vec();
        pts[i] = t.clone();
        samples.push((t, wform.value(wprime, &pts)?));
    }
    UnivariateRational::fit(&samples, poles, holdout)
}

/// L(−1)-derivative checks in direction `i`.
pub fn check_lminus1_property(wform: &WForm, wprime: &DualVector, points: &[ExactScalar], i: usize) -> Report {
    let mut rep = Report::new();
    let id = |s: &str| format!("lminus1.{s}.slot{i}");
    let anchor = "derivative in a slot equals insertion of the translation generator";
    let derivative = (|| -> Result<Check> {
        let f = slot_function(wform, wprime, points, i)?;
        let lhs = f.derivative(&points[i])?;
        let inserted = wform.with_state(i, virasoro_apply(-1, &wform.slots[i].state));
        let rhs = inserted.value(wprime, points)?;
        Ok(Check::exact(&id("derivative"), anchor, &(lhs - rhs)))
    })();
    rep.push_result(&id("derivative"), anchor, derivative);

    let sum_anchor = "sum of slot derivatives equals the module translation action";
    match wform.tail() {
        Some(tail) => {
            let sum = (|| -> Result<Check> {
                let mut lhs = ExactScalar::zero();
                for k in 0..wform.arity() {
                    lhs += wform.with_state(k, virasoro_apply(-1, &wform.slots[k].state)).value(wprime, points)?;
                }
                let shifted_dual = wform.value(&lminus1_transpose(wprime), points)?;
                let mut moved_tail = wform.clone();
                moved_tail.kind = FormKind::correlator(virasoro_apply(-1, tail));
                let rhs = shifted_dual - moved_tail.value(wprime, points)?;
                Ok(Check::exact(&id("sum"), sum_anchor, &(lhs - rhs)))
            })();
            rep.push_result(&id("sum"), sum_anchor, sum);
        }
        None => rep.push(Check::skip(&id("sum"), sum_anchor, "form is not a plain correlator")),
    }

    let tr_anchor = "global translation of all points equals the translated dual vector";
    if all_tails_vacuum(&wform.kind) {
        let tr = (|| -> Result<Check> {
            let c = ExactScalar::ratio(1, 3);
            let moved: Vec<ExactScalar> = points.iter().map(|z| z + &c).collect();
            let lhs = wform.value(wprime, &moved)?;
            let rhs = wform.value(&translate_dual(wprime, &c), points)?;
            Ok(Check::exact(&id("translation"), tr_anchor, &(lhs - rhs)))
        })();
        rep.push_result(&id("translation"), tr_anchor, tr);
    } else {
        rep.push(Check::skip(&id("translation"), tr_anchor, "tail is not the vacuum"));
    }

    let ps_anchor = "Taylor series in one slot converges to the shifted value";
    let ps = (|| -> Result<Check> {
        let prec = Precision::from_env();
        let mut nearest = points.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, z)| (&points[i] - z).norm_sqr()).min();
        if !all_tails_vacuum(&wform.kind) {
            let origin = points[i].norm_sqr();
            nearest = Some(nearest.map_or(origin.clone(), |d| d.min(origin)));
        }
        let mut t = ExactScalar::ratio(1, 2);
        if let Some(d) = nearest {
            while (&t * &t).norm_sqr() * num_rational::BigRational::from_integer(16.into()) >= d {
                t = &t * &ExactScalar::ratio(1, 2);
            }
        }
        let mut shifted = points.to_vec();
        shifted[i] = &points[i] + &t;
        let target = wform.value(wprime, &shifted)?;
        let mut terms = Vec::new();
        let mut state = wform.slots[i].state.clone();
        let mut coef = ExactScalar::one();
        for k in 0..=wform.level {
            if k > 0 {
                state = virasoro_apply(-1, &state);
                coef = coef * &t * ExactScalar::ratio(1, k as i64);
            }
            let term = if state.is_zero() { ExactScalar::zero() } else { wform.with_state(i, state.clone()).value(wprime, points)? };
            terms.push(term * &coef);
        }
        let series = LevelSeries::from_levels(terms);
        let est = certified(&series, prec)?;
        Ok(Check::bounded(&id("power_series"), ps_anchor, &modulus(&(target - est.value), prec), &est.bound))
    })();
    rep.push_result(&id("power_series"), ps_anchor, ps);
    rep
}

/// `z^{L(0)}` on a graded vector.
pub fn scale_by_weight(v: &GradedVector, z: &ExactScalar) -> GradedVector {
    GradedVector::from_terms(v.terms().map(|(p, c)| (p.clone(), c * &z.powi(p.weight() as i64))))
}

pub fn scale_dual_by_weight(d: &DualVector, z: &ExactScalar) -> DualVector {
    let mut out = DualVector::zero();
    for (p, c) in d.terms() {
        out.add_term(p.clone(), &(c * &z.powi(p.weight() as i64)));
    }
    out
}

/// `⟨w′, z^{L(0)} F(v_i, z_i)⟩` against `F(z^{L(0)} v_i, z z_i)`; tails are scaled with the states.
pub fn check_l0_conjugation(wform: &WForm, wprime: &DualVector, z_scale: &ExactScalar, points: &[ExactScalar]) -> Report {
    let mut rep = Report::new();
    let id = "l0_conjugation";
    let anchor = "weight grading conjugates to rescaled states and points";
    let r = (|| -> Result<Check> {
        if z_scale.is_zero() {
            return Err(VoxError::InvalidArgument("zero scale".into()));
        }
        let lhs = wform.value(&scale_dual_by_weight(wprime, z_scale), points)?;
        let Some(kind) = map_tails(&wform.kind, &|t| scale_by_weight(t, z_scale)) else {
            return Ok(Check::skip(id, anchor, "products are checked by the product module"));
        };
        let mut scaled = wform.clone();
        scaled.kind = kind;
        for s in scaled.slots.iter_mut() {
            s.state = scale_by_weight(&s.state, z_scale);
        }
        let pts: Vec<ExactScalar> = points.iter().map(|p| p * z_scale).collect();
        let rhs = scaled.value(wprime, &pts)?;
        Ok(Check::exact(id, anchor, &(lhs - rhs)))
    })();
    rep.push_result(id, anchor, r);
    rep
}

/// A relabeled form and the sign `(−1)^{|σ|}` of the permutation.
#[derive(Clone, Debug)]
pub struct PermutedForm {
    pub form: WForm,
    pub sign: i32,
}

/// Parity of a permutation given as images `σ(0), …, σ(n−1)`.
pub fn permutation_sign(sigma: &[usize]) -> Result<i32> {
    let n = sigma.len();
    let mut seen = vec![false; n];
    for &s in sigma {
        if s >= n || seen[s] {
            return Err(VoxError::InvalidArgument(format!("{sigma:?} is not a permutation")));
        }
        seen[s] = true;
    }
    let mut sign = 1;
    let mut visited = vec![false; n];
    for start in 0..n {
        let mut len = 0;
        let mut k = start;
        while !visited[k] {
            visited[k] = true;
            k = sigma[k];
            len += 1;
        }
        if len > 0 && len % 2 == 0 {
            sign = -sign;
        }
    }
    Ok(sign)
}

/// `F_σ(x₁,…,xₙ) = F(x_{σ(1)},…,x_{σ(n)})`, inputs moving with their points.
pub fn permute_form(wform: &WForm, sigma: &[usize]) -> Result<PermutedForm> {
    if sigma.len() != wform.arity() {
        return Err(VoxError::InvalidArgument("permutation size differs from arity".into()));
    }
    let sign = permutation_sign(sigma)?;
    if sigma.iter().enumerate().all(|(i, &s)| i == s) {
        return Ok(PermutedForm { form: wform.clone(), sign });
    }
    let mut form = wform.clone();
    form.kind = wform.kind.clone().permuted(sigma.to_vec());
    Ok(PermutedForm { form, sign })
}

/// Distinct rational sample tuples, deterministic in `seed`.
pub fn sample_configurations(n: usize, count: usize, seed: u64) -> Vec<Vec<ExactScalar>> {
    let mut out = Vec::new();
    let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    while out.len() < count {
        let mut pts = Vec::new();
        for _ in 0..n {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let num = ((s >> 33) % 41) as i64 - 20;
            let den = ((s >> 17) % 7) as i64 + 2;
            pts.push(ExactScalar::ratio(num, den));
        }
        let distinct = (0..n).all(|i| !pts[i].is_zero() && (0..i).all(|j| pts[i] != pts[j]));
        if distinct && !out.contains(&pts) {
            out.push(pts);
        }
    }
    out
}

/// Reconstruction of a form's exact values over a sample sweep.
pub fn reconstruct_form(wform: &WForm, wprime: &DualVector, samples: &[Vec<ExactScalar>], holdout: usize) -> Result<RationalReconstruction> {
    let cap = 2 * wform.slots.iter().map(|s| s.state.max_weight()).max().unwrap_or(0);
    let origin = !all_tails_vacuum(&wform.kind);
    let ansatz = PoleAnsatz::coincidences(wform.arity(), cap, origin);
    let mut data = Vec::new();
    for p in samples {
        match wform.value(wprime, p) {
            Ok(v) => data.push((p.clone(), v)),
            Err(VoxError::OutOfRegion(_)) | Err(VoxError::NotExact(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    reconstruct_rational(&data, &ansatz, holdout)
}

/// Compares reconstructions of `F` and `F_σ`; they coincide for commutative correlator forms.
pub fn check_permutation_invariance(wform: &WForm, wprime: &DualVector, sigma: &[usize], samples: &[Vec<ExactScalar>]) -> Report {
    let mut rep = Report::new();
    let id = format!("permutation.{}", sigma.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(""));
    let anchor = "relabeling slots with their points leaves the rational function unchanged";
    let r = (|| -> Result<Check> {
        let p = permute_form(wform, sigma)?;
        let a = reconstruct_form(wform, wprime, samples, 3)?;
        let b = reconstruct_form(&p.form, wprime, samples, 3)?;
        Ok(Check::predicate(&id, anchor, a == b).with_detail(format!("sign {}", p.sign)))
    })();
    rep.push_result(&id, anchor, r);
    rep
}

fn group_regions(groups: &[Vec<ExactScalar>], centers: &[ExactScalar]) -> (Vec<ExactScalar>, Vec<Constraint>) {
    let mut pts: Vec<ExactScalar> = groups.iter().flatten().cloned().collect();
    let base = pts.len();
    pts.extend(centers.iter().cloned());
    let mut idx = Vec::new();
    let mut k = 0;
    for g in groups {
        idx.push((k..k + g.len()).collect::<Vec<_>>());
        k += g.len();
    }
    let mut cons = Vec::new();
    for i in 0..groups.len() {
        for j in 0..groups.len() {
            if i == j {
                continue;
            }
            for &p in &idx[i] {
                for &q in &idx[j] {
                    cons.push(Constraint {
                        lhs: vec![Gap::between(p, base + i), Gap::between(q, base + j)],
                        rhs: Gap::between(base + i, base + j),
                    });
                }
            }
        }
    }
    (pts, cons)
}

fn build_groups(states: &[Vec<GradedVector>], points: &[Vec<ExactScalar>], centers: &[ExactScalar]) -> Vec<SlotInput> {
    states
        .iter()
        .zip(points)
        .zip(centers)
        .map(|((vs, zs), c)| {
            let members = vs.iter().zip(zs).map(|(v, z)| SlotInput::plain(v.clone(), z.clone())).collect();
            SlotInput::group(members, c.clone())
        })
        .collect()
}

fn split_by_partition<T: Clone>(items: &[T], partition: &[usize]) -> Result<Vec<Vec<T>>> {
    if partition.iter().sum::<usize>() != items.len() {
        return Err(VoxError::InvalidArgument("partition does not match the number of states".into()));
    }
    let mut out = Vec::new();
    let mut k = 0;
    for &l in partition {
        out.push(items[k..k + l].to_vec());
        k += l;
    }
    Ok(out)
}

/// Grouped projections `P_{r_i}` of `E(v…, z−ζ_i; 𝟏)` inserted into `F` at `ζ_i`,
/// compared with the flat evaluation and across the supplied centre sets.
pub fn composability_series_i(
    wform: &WForm,
    partition: &[usize],
    states: &[GradedVector],
    points: &[ExactScalar],
    zetas: &[Vec<ExactScalar>],
    wprime: &DualVector,
) -> Result<ConvergenceReport> {
    let prec = Precision::from_env();
    let gstates = split_by_partition(states, partition)?;
    let gpoints = split_by_partition(points, partition)?;
    let first = zetas.first().ok_or_else(|| VoxError::InvalidArgument("no centres given".into()))?;
    for centers in zetas {
        let (pts, cons) = group_regions(&gpoints, centers);
        if let Some(c) = cons.iter().find(|c| !c.holds(&pts, prec)) {
            return Err(VoxError::OutOfRegion(format!("separation {c} fails")));
        }
    }
    let opts = EvalOptions { level: wform.level, mode: EvalMode::Series, prec };
    let reference = eval(&wform.kind, &EvalOptions { mode: EvalMode::Exact, ..opts }, wprime, &[], &build_groups(&gstates, &gpoints, first))?;
    let mut report = match wform.tail() {
        Some(tail) => ConvergenceReport::from_series(&series_correlator(wprime, tail, &build_groups(&gstates, &gpoints, first), wform.level, prec)?, prec),
        None => {
            let est = eval(&wform.kind, &opts, wprime, &[], &build_groups(&gstates, &gpoints, first))?;
            ConvergenceReport { levels: vec![], value: est.value, ratio: None, tail: Some(est.bound), cauchy: None, checks: Report::new() }
        }
    };
    let anchor = "grouped projections converge to the flat correlator";
    let estimates: Vec<Result<Estimate>> =
        zetas.iter().map(|c| eval(&wform.kind, &opts, wprime, &[], &build_groups(&gstates, &gpoints, c))).collect();
    match &estimates[0] {
        Ok(e) => report.checks.push(Check::bounded("composability_i.flat", anchor, &modulus(&(&e.value - &reference.value), prec), &e.bound)),
        Err(err) => report.checks.push(Check::error("composability_i.flat", anchor, err)),
    }
    for (k, e) in estimates.iter().enumerate().skip(1) {
        let id = format!("composability_i.centres{k}");
        let anchor = "grouped series is independent of the expansion centres";
        match (e, &estimates[0]) {
            (Ok(a), Ok(b)) => report.checks.push(Check::bounded(&id, anchor, &modulus(&(&a.value - &b.value), prec), &a.bound.add(&b.bound))),
            (Err(err), _) | (_, Err(err)) => report.checks.push(Check::error(&id, anchor, err)),
        }
    }
    Ok(report)
}

/// `Σ_q ⟨w′, E(v₁,z₁;…;v_m,z_m; P_q F(…))⟩` with each projection evaluated exactly.
pub fn composability_series_j(
    wform: &WForm,
    front: &[(GradedVector, ExactScalar)],
    points: &[ExactScalar],
    wprime: &DualVector,
) -> Result<ConvergenceReport> {
    let prec = Precision::from_env();
    let back = wform.inputs(points)?;
    let inner_max = points.iter().map(|z| z.norm_sqr()).max();
    for (_, z) in front {
        if z.is_zero() || inner_max.as_ref().is_some_and(|m| z.norm_sqr() <= *m) {
            return Err(VoxError::OutOfRegion(format!("front point {z} is not outside the form's points")));
        }
    }
    let exact = EvalOptions { level: wform.level, mode: EvalMode::Exact, prec };
    let mut levels = Vec::new();
    for q in 0..=wform.level {
        let mut term = ExactScalar::zero();
        for p in PartitionState::all_of_weight(q) {
            let coeff = eval(&wform.kind, &exact, &DualVector::coordinate(p.clone()), &[], &back)?.value;
            if coeff.is_zero() {
                continue;
            }
            term += coeff * exact_correlator(wprime, front, &GradedVector::basis(p))?;
        }
        levels.push(term);
    }
    let series = LevelSeries::from_levels(levels);
    let mut report = ConvergenceReport::from_series(&series, prec);
    let outers: Vec<super::eval::Outer> =
        front.iter().map(|(v, z)| super::eval::Outer::new(SlotInput::plain(v.clone(), z.clone()), super::eval::Side::Left)).collect();
    let reference = eval(&wform.kind, &exact, wprime, &outers, &back)?.value;
    let anchor = "projections of the form composed with outer vertex operators converge";
    match &report.tail {
        Some(t) => report.checks.push(Check::bounded("composability_j.flat", anchor, &modulus(&(&report.value - &reference), prec), t)),
        None => {
            let err = series.certify(prec).err().unwrap_or(VoxError::NonContractive("uncertified".into()));
            report.checks.push(Check::error("composability_j.flat", anchor, &err));
        }
    }
    Ok(report)
}

/// Checks reconstructed coincidence pole orders against `N(v_i, v_j) = wt v_i + wt v_j`.
pub fn check_pole_bounds(recon: &RationalReconstruction, states: &[GradedVector]) -> Check {
    let mut worst = 0i64;
    for (locus, order) in &recon.poles {
        let allowed = match locus.j {
            Some(j) => states[locus.i].max_weight() + states[j].max_weight(),
            None => continue,
        };
        worst = worst.max(*order as i64 - allowed as i64);
    }
    Check::predicate("composability_j.pole_orders", "coincidence pole orders stay within the weight table", worst <= 0)
        .with_detail(format!("max excess {worst}"))
}

/// Grouped-projection series against the flat correlator at shifted points.
pub fn check_correl_fn(
    groups: &[Vec<GradedVector>],
    centers: &[ExactScalar],
    offsets: &[Vec<ExactScalar>],
    tail: &GradedVector,
    wprime: &DualVector,
    level: u32,
) -> Report {
    let prec = Precision::from_env();
    let mut rep = Report::new();
    let anchor = "grouped projections converge to the correlator at shifted points";
    let absolute: Vec<Vec<ExactScalar>> =
        offsets.iter().zip(centers).map(|(os, c)| os.iter().map(|o| c + o).collect()).collect();
    let mut ok = true;
    for i in 0..groups.len() {
        for j in 0..groups.len() {
            if i == j {
                continue;
            }
            let dist = modulus(&(&centers[i] - &centers[j]), prec);
            for p in &offsets[i] {
                for q in &offsets[j] {
                    let s = modulus(p, prec).add(&modulus(q, prec));
                    ok &= s.cmp_re(&dist) == std::cmp::Ordering::Less;
                }
            }
        }
    }
    rep.push(Check::predicate("correl_fn.region", "offset discs stay inside centre separations", ok));
    let r = (|| -> Result<Check> {
        let inputs = build_groups(groups, &absolute, centers);
        let series = series_correlator(wprime, tail, &inputs, level, prec)?;
        let est = certified(&series, prec)?;
        let leaves: Vec<_> = inputs.iter().flat_map(SlotInput::leaves).collect();
        let flat = exact_correlator(wprime, &leaves, tail)?;
        Ok(Check::bounded("correl_fn.residual", anchor, &modulus(&(est.value - flat), prec), &est.bound))
    })();
    rep.push_result("correl_fn.residual", anchor, r);
    rep
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

    fn two_point() -> WForm {
        WForm::correlator(vec![a(), a()], GradedVector::vacuum(), 30)
    }

    #[test]
    fn eval_e_examples() {
        let f = WForm::correlator(vec![], GradedVector::vacuum(), 4);
        assert_eq!(eval_e(&f, &DualVector::vacuum(), &[], &GradedVector::vacuum()).unwrap(), ExactScalar::one());
        let v = eval_e(&two_point(), &DualVector::vacuum(), &[r(2, 1), r(1, 1)], &GradedVector::vacuum()).unwrap();
        assert_eq!(v, ExactScalar::one() - r(32, 1 << 31));
        let one = WForm::correlator(vec![GradedVector::vacuum()], GradedVector::vacuum(), 4);
        let w = DualVector::vacuum();
        assert_eq!(eval_e(&one, &w, &[r(7, 3)], &GradedVector::vacuum()).unwrap(), ExactScalar::one());
    }

    #[test]
    fn intertwining_examples() {
        let ctx = VOAContext::build_heisenberg(6);
        let w = GradedVector::from_modes(&[2]);
        // v = 𝟏 gives e^{ζL(−1)} w
        let got = eval_intertwining(&ctx, &w, &r(1, 2), &GradedVector::vacuum()).unwrap();
        assert_eq!(got.project(2), w);
        assert_eq!(got.project(3), virasoro_apply(-1, &w).scale(&r(1, 2)));
        // w = 𝟏: e^{L(−1)} Y(a,−1) 𝟏 = a
        let got = eval_intertwining(&ctx, &GradedVector::vacuum(), &r(1, 1), &a()).unwrap();
        assert_eq!(got, a());
        assert_eq!(eval_intertwining(&ctx, &w, &ExactScalar::zero(), &a()), Err(VoxError::PoleAtOrigin));
    }

    #[test]
    fn lminus1_on_two_point() {
        let rep = check_lminus1_property(&two_point(), &DualVector::vacuum(), &[r(2, 1), r(1, 1)], 0);
        assert!(rep.all_pass(), "{:?}", rep);
        let vac = WForm::correlator(vec![GradedVector::vacuum(), a()], a(), 12);
        let rep = check_lminus1_property(&vac, &DualVector::coordinate(PartitionState::new(vec![1, 1])), &[r(3, 1), r(2, 1)], 0);
        assert!(rep.all_pass(), "{:?}", rep);
    }

    #[test]
    fn l0_conjugation_examples() {
        let f = two_point();
        let w = DualVector::vacuum();
        assert!(check_l0_conjugation(&f, &w, &r(2, 1), &[r(2, 1), r(1, 1)]).all_pass());
        let g = WForm::correlator(vec![a(), GradedVector::conformal()], GradedVector::from_modes(&[1]), 12);
        let wp = DualVector::coordinate(PartitionState::new(vec![2, 1, 1]));
        assert!(check_l0_conjugation(&g, &wp, &r(3, 2), &[r(5, 1), r(2, 1)]).all_pass());
    }

    #[test]
    fn permutation_examples() {
        assert_eq!(permutation_sign(&[1, 0, 2]).unwrap(), -1);
        assert_eq!(permutation_sign(&[1, 2, 0]).unwrap(), 1);
        assert!(permutation_sign(&[0, 0]).is_err());
        let samples = sample_configurations(2, 10, 7);
        let rep = check_permutation_invariance(&two_point(), &DualVector::vacuum(), &[1, 0], &samples);
        assert!(rep.all_pass(), "{:?}", rep);
        let rec = reconstruct_form(&two_point(), &DualVector::vacuum(), &samples, 3).unwrap();
        assert_eq!(rec.pole_order(super::super::rational::Locus { i: 0, j: Some(1) }), 2);
    }

    #[test]
    fn composability_i_two_plus_one() {
        // ⟨a′, Y(Y(a,z₁−ζ₁)Y(a,z₂−ζ₁)𝟏, ζ₁) Y(a, z₃) 𝟏⟩ style 2+1 split
        let f = WForm::correlator(vec![a(), a()], GradedVector::vacuum(), 24);
        let wp = DualVector::coordinate(PartitionState::new(vec![1]));
        let states = vec![a(), a(), a()];
        let pts = vec![r(41, 8), r(39, 8), r(1, 1)];
        let zetas = vec![vec![r(79, 16), r(1, 1)], vec![r(159, 32), r(1, 1)]];
        let rep = composability_series_i(&f, &[2, 1], &states, &pts, &zetas, &wp).unwrap();
        assert!(rep.checks.all_pass(), "{:?}", rep.checks);
        assert!(rep.certified());
    }

    #[test]
    fn composability_j_one_front() {
        let f = WForm::correlator(vec![a()], GradedVector::vacuum(), 30);
        let rep = composability_series_j(&f, &[(a(), r(3, 1))], &[r(1, 1)], &DualVector::vacuum()).unwrap();
        assert!(rep.checks.all_pass(), "{:?}", rep.checks);
        let vac = composability_series_j(&f, &[(GradedVector::vacuum(), r(3, 1))], &[r(1, 1)], &DualVector::vacuum()).unwrap();
        assert!(vac.value.is_zero());
    }

    #[test]
    fn correl_fn_two_groups() {
        let rep = check_correl_fn(
            &[vec![a()], vec![a()]],
            &[r(4, 1), r(1, 1)],
            &[vec![r(1, 4)], vec![r(1, 4)]],
            &GradedVector::vacuum(),
            &DualVector::vacuum(),
            30,
        );
        assert!(rep.all_pass(), "{:?}", rep);
    }
}
