//! Desk-scale acceptance run: cutoff 6, level 12, exact rational sample points.
//!
//! Prints one line per criterion. Two criteria cannot hold as pinned; for those the
//! test checks that the failure is exactly the derived one and reports FAIL.

use std::process::Command as Process;

use num_rational::BigRational;
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use voxform::cli::{run, Command, FaultSet, RunConfig};
use voxform::complex::{
    coboundary, delta_ex_check, delta_squared_check, exceptional_g, exceptional_region, leibniz_check, leibniz_configurations,
    stated_region, shuffle_check, Cochain, ExceptionalTerm, PairCentres, ProductSetup,
};
use voxform::coords::{
    check_commutators, check_form_invariance, check_representation, check_round_trip, representation_family, sample_series, NDimChange,
};
use voxform::forms::{reconstruct_form, sample_configurations, Locus, WForm};
use voxform::pairing::{check_pairing, BilinearForm};
use voxform::product::{cauchy_report, epsilon_product, partition_independence, EpsProductSpec, PairingMode, SplitSetup};
use voxform::report::Report;
use voxform::scalars::{ApproxScalar, ExactScalar, Precision};
use voxform::sewing::{check_sewing, SphereConfig};
use voxform::voa::{check_axioms, correlator_exact, correlator_series, DualVector, GradedVector, Insertion, PartitionState, VOAContext};

const CUTOFF: u32 = 6;
const LEVEL: u32 = 12;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn r(p: i64, q: i64) -> ExactScalar {
    ExactScalar::ratio(p, q)
}

fn a() -> GradedVector {
    GradedVector::generator()
}

fn prec() -> Precision {
    Precision::from_env()
}

fn failures(rep: &Report) -> String {
    rep.failures().iter().map(|c| format!("{} ({} > {})", c.id, c.residual, c.bound)).collect::<Vec<_>>().join("; ")
}

fn sewn(epsilon: ExactScalar, zeta1: ExactScalar) -> SphereConfig {
    SphereConfig::with_partner(BigRational::one(), BigRational::one(), epsilon, zeta1).unwrap()
}

fn generator_product() -> EpsProductSpec {
    let cfg = sewn(r(1, 16), r(1, 4)).with_points(vec![r(2, 1)], vec![r(3, 1)]);
    EpsProductSpec::new(
        WForm::correlator(vec![a()], GradedVector::vacuum(), LEVEL),
        WForm::correlator(vec![a()], GradedVector::vacuum(), LEVEL),
        cfg,
        LEVEL,
    )
}

fn axioms() -> Outcome {
    let ctx = VOAContext::build_heisenberg(CUTOFF);
    let rep = check_axioms(&ctx, &[r(1, 3), r(3, 2), r(-5, 4)]);
    let exact = rep.checks.iter().all(|c| c.residual == "0");
    outcome(rep.all_pass() && exact, format!("{} identities exact at cutoff 6", rep.checks.len()))
}

/// Level `l` of `⟨𝟏′, a(2)a(1)𝟏⟩` is `l/2^{l+1}`, so the error after level `L` is `(L+2)/2^{L+1}`,
/// which exceeds `2·2^{−L}` for every `L ≥ 3`.
fn two_point() -> (Outcome, bool) {
    let s = correlator_series(
        &DualVector::vacuum(),
        &[Insertion::plain(a(), r(2, 1)), Insertion::plain(a(), r(1, 1))],
        &GradedVector::vacuum(),
        LEVEL,
    )
    .unwrap();
    let mut as_derived = true;
    let mut violated = Vec::new();
    for l in 4..=LEVEL {
        let err = ExactScalar::one() - s.partial_sum_to(l);
        as_derived &= err == r(l as i64 + 2, 1i64 << (l + 1));
        if err.norm_sqr() > (r(2, 1) * r(1, 2).powi(l as i64)).norm_sqr() {
            violated.push(l);
        }
    }
    let cert = s.certify(prec()).unwrap();
    let err = ApproxScalar::from_exact(&(ExactScalar::one() - s.partial_sum()), prec());
    let covered = err.abs().cmp_re(&cert.tail) != std::cmp::Ordering::Greater;
    let rec = reconstruct_form(&WForm::correlator(vec![a(), a()], GradedVector::vacuum(), LEVEL), &DualVector::vacuum(), &sample_configurations(2, 12, 4), 3)
        .unwrap();
    let pole = rec.pole_order(Locus { i: 0, j: Some(1) });
    let faithful = as_derived && covered && pole == 2;
    let detail = format!(
        "pinned bound 2*(1/2)^L violated at L = {violated:?}: error is exactly (L+2)/2^(L+1); certified tail covers the error: {covered}; pole order at z1=z2: {pole}"
    );
    (outcome(violated.is_empty() && faithful, detail), faithful && violated == (4..=LEVEL).collect::<Vec<_>>())
}

fn bilinear_form() -> Outcome {
    let ctx = VOAContext::build_heisenberg(CUTOFF);
    let form = BilinearForm::new(CUTOFF, r(-1, 16)).unwrap();
    let rep = check_pairing(&ctx, &form, 3, 3, 4);
    outcome(rep.all_pass(), format!("{} exact checks {}", rep.checks.len(), failures(&rep)))
}

/// `∏ᵢ −(−λ²)^{−nᵢ} nᵢ · ∏ mult!`: the norm of a monomial, coded apart from the library.
fn oracle_norm(parts: &[u32], lambda_sq: &ExactScalar) -> ExactScalar {
    let mut out = ExactScalar::one();
    for &n in parts {
        out = out * -((-lambda_sq).powi(-(n as i64)) * ExactScalar::from_int(n as i64));
    }
    let mut k = 0;
    while k < parts.len() {
        let run = parts[k..].iter().take_while(|&&p| p == parts[k]).count();
        for m in 2..=run {
            out = out * ExactScalar::from_int(m as i64);
        }
        k += run;
    }
    out
}

/// `⟨𝟏′, Y(a,x) Y(a(−n₁)…𝟏, w) 𝟏⟩` by mode pairing: only one-part states contract with a
/// single field, `⟨a(x) ∂^{(n−1)}a(w)⟩ = n (x − w)^{−n−1}`.
fn oracle_factor(parts: &[u32], x: &ExactScalar, w: &ExactScalar) -> ExactScalar {
    match parts {
        [n] => ExactScalar::from_int(*n as i64) * (x - w).powi(-(*n as i64) - 1),
        _ => ExactScalar::zero(),
    }
}

fn eps_product() -> Outcome {
    let spec = generator_product();
    let (_, rep) = epsilon_product(&spec, &DualVector::vacuum()).unwrap();
    let ls = spec.lambda_sq();
    let (x, y) = (&spec.cfg.x_points[0], &spec.cfg.y_points[0]);
    let (w1, w2) = (-&spec.cfg.zeta1, -&spec.cfg.zeta2);
    let mut oracle_ok = true;
    for l in 0..=LEVEL {
        let mut c = ExactScalar::zero();
        for p in PartitionState::all_of_weight(l) {
            let f1 = oracle_factor(p.parts(), x, &w1);
            let f2 = oracle_factor(p.parts(), y, &w2);
            c += f1 * f2 * oracle_norm(p.parts(), &ls).inv().unwrap();
        }
        oracle_ok &= rep.levels[l as usize] == c;
    }
    // random unimodular changes of basis on V_l, l ≤ 4
    let pairing = BilinearForm::new(LEVEL, ls.clone()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut invariant = true;
    for l in 1..=4u32 {
        let basis: Vec<GradedVector> = PartitionState::all_of_weight(l).into_iter().map(GradedVector::basis).collect();
        let d = basis.len();
        let changed: Vec<GradedVector> = (0..d)
            .map(|i| {
                let mut v = basis[i].clone();
                for b in basis.iter().skip(i + 1) {
                    v = v.add(&b.scale(&r(rng.gen_range(-5..=5), rng.gen_range(1..=4))));
                }
                v.scale(&r(rng.gen_range(1..=3), 1))
            })
            .collect();
        let duals = pairing.dual_of(&changed).unwrap();
        let value = |v: &GradedVector, z: &ExactScalar, w: &ExactScalar| {
            correlator_exact(&DualVector::vacuum(), &[(a(), z.clone()), (v.clone(), w.clone())], &GradedVector::vacuum()).unwrap()
        };
        let mut c = ExactScalar::zero();
        for (u, ubar) in changed.iter().zip(&duals) {
            c += value(u, x, &w1) * value(ubar, y, &w2);
        }
        invariant &= c == rep.levels[l as usize];
    }
    let q = rep.ratio.clone().unwrap();
    let decays = q.cmp_re(&ApproxScalar::from_rational(&BigRational::new(1.into(), 2.into()), prec())) == std::cmp::Ordering::Less;
    outcome(
        decays && oracle_ok && invariant,
        format!("fitted q = {}, oracle agreement at l <= 12: {oracle_ok}, basis-change invariance: {invariant}", q.sci_string()),
    )
}

fn cauchy() -> Outcome {
    let rep = cauchy_report(&generator_product(), &DualVector::vacuum(), &ApproxScalar::from_int(4, prec())).unwrap();
    let est = rep.cauchy.unwrap();
    outcome(
        rep.checks.all_pass() && est.from_level == 2,
        format!("C = {} (M = {}, R = {}, levels 2..12)", est.constant.sci_string(), est.m.sci_string(), est.r.sci_string()),
    )
}

fn cochain(states: Vec<GradedVector>, m: u32) -> Cochain {
    Cochain::correlator(states, GradedVector::vacuum(), m, 2 * LEVEL)
}

/// Bidegrees and `δ² = 0` hold. The n = 3 shuffle sum of a symmetric three-point function
/// is `F·(1 − 1 + 1) = F`; it vanishes only where `F` does (vacuum dual, three generators).
fn coboundary_criterion() -> (Outcome, bool) {
    let vac = DualVector::vacuum();
    let built = [
        (cochain(vec![], 3), [a(), a()], vec![r(4, 1), r(2, 1)]),
        (cochain(vec![a()], 2), [a(), a()], vec![r(17, 4), r(3, 1), r(1, 1)]),
        (cochain(vec![GradedVector::conformal()], 2), [a(), GradedVector::conformal()], vec![r(17, 4), r(3, 1), r(1, 1)]),
        (cochain(vec![a()], 3), [GradedVector::conformal(), a()], vec![r(17, 4), r(3, 1), r(1, 1)]),
    ];
    let mut bidegrees = true;
    let mut squares = true;
    for (c, extra, pts) in &built {
        let mut states = c.form.states();
        states.push(extra[0].clone());
        let d = coboundary(c, states).unwrap();
        bidegrees &= d.bidegree() == (c.arity() + 1, c.composable - 1);
        let rep = delta_squared_check(c, extra, &vac, pts);
        squares &= rep.all_pass();
        let series = rep.checks.iter().find(|k| k.id.ends_with("series")).unwrap();
        squares &= series.residual.parse::<f64>().unwrap() <= 1e-6;
    }
    let two = shuffle_check(&cochain(vec![a(), a()], 1), 1, &vac, &[r(3, 1), r(1, 1)]).all_pass();
    let three = cochain(vec![a(); 3], 1);
    let pts = [r(5, 1), r(3, 1), r(1, 1)];
    let at_vacuum = (1..3).all(|s| shuffle_check(&three, s, &vac, &pts).all_pass());
    let wa = DualVector::coordinate(PartitionState::new(vec![1]));
    let residual = shuffle_check(&three, 1, &wa, &pts);
    let f = three.value(&wa, &pts).unwrap();
    let derived = residual.checks[0].residual == ApproxScalar::from_exact(&f, prec()).abs().sci_string() && !f.is_zero();
    let attainable = bidegrees && squares && two && at_vacuum;
    let detail = format!(
        "bidegrees {bidegrees}, delta^2 within 1e-6 on {} cochains {squares}, n=2 shuffle exact {two}, n=3 shuffle at vacuum dual {at_vacuum}; \
         n=3 shuffle with dual a' equals F = {f} instead of 0",
        built.len()
    );
    (outcome(false, detail), attainable && derived)
}

fn leibniz() -> Outcome {
    let one = BigRational::one();
    let setup = ProductSetup::new(SphereConfig::with_partner(one.clone(), one, r(1, 16), r(1, 4)).unwrap(), 8);
    let vac = DualVector::vacuum();
    let e = |n: usize| Cochain::correlator(vec![a(); n], GradedVector::vacuum(), 1, LEVEL);
    let w = GradedVector::conformal;
    let mut rep = Report::new();
    let mut flipped = Report::new();
    for (k, states) in [(1usize, vec![a(), w(), a()]), (2, vec![a(), w(), a(), w()])] {
        let cfgs = leibniz_configurations(k, 1, &setup.cfg.zeta1, 5, 40 + k as u64);
        rep.extend(leibniz_check(&e(k), &e(1), &setup, &vac, &states, &cfgs, false));
        flipped.extend(leibniz_check(&e(k), &e(1), &setup, &vac, &states, &cfgs[..1], true));
    }
    let worst = rep.checks.iter().map(|c| c.residual.parse::<f64>().unwrap_or(f64::NAN)).fold(0.0, f64::max);
    outcome(
        rep.all_pass() && rep.checks.len() == 10 && !flipped.all_pass(),
        format!("10 configurations (k = 1, 2), worst residual {worst:.3e}, flipped sign detected: {} {}", !flipped.all_pass(), failures(&rep)),
    )
}

fn exceptional() -> Outcome {
    let vac = DualVector::vacuum();
    let c = cochain(vec![a(), a()], 2);
    let mut ok = true;
    let groups = [(ExceptionalTerm::First, [r(6, 1), r(3, 2), r(3, 4)], r(1, 1)), (ExceptionalTerm::Second, [r(11, 2), r(21, 4), r(1, 1)], r(5, 1))];
    for (which, pts, zeta) in &groups {
        ok &= stated_region(*which, pts, zeta) && exceptional_region(*which, pts, zeta);
        ok &= exceptional_g(&c, *which, &a(), pts, zeta, &vac).unwrap().certified();
    }
    let stated_only = [r(4, 1), r(2, 1), r(-3, 1)];
    let inside = stated_region(ExceptionalTerm::First, &stated_only, &r(1, 1));
    let diverges = exceptional_g(&c, ExceptionalTerm::First, &a(), &stated_only, &r(1, 1), &vac).is_err();
    let centres = [PairCentres { first: r(3, 1), second: r(1, 1) }, PairCentres { first: r(49, 16), second: r(15, 16) }];
    let dex = delta_ex_check(&cochain(vec![a()], 2), &[a(), a(), GradedVector::conformal()], &[r(17, 4), r(3, 1), r(1, 1)], &centres, &vac);
    ok &= dex.all_pass();
    outcome(
        ok,
        format!(
            "G1, G2 certified at stated-region points; delta_ex o delta residuals within tails; \
             (4,2,-3) with zeta=1 lies in the stated region ({inside}) but the series diverges ({diverges})"
        ),
    )
}

fn coordinates() -> Outcome {
    let ctx = VOAContext::build_heisenberg(CUTOFF);
    let round = check_round_trip(&sample_series(20, 6, 99));
    let rep = check_representation(&ctx, &representation_family(6));
    let comm = check_commutators(3, 2, &r(2, 1), 3);
    let form = WForm::correlator(vec![a(), a()], GradedVector::vacuum(), LEVEL);
    let cfgs = sample_configurations(2, 10, 17);
    let mut inv = Report::new();
    for ch in [NDimChange::Scaling(r(3, 1)), NDimChange::Scaling(r(-2, 5)), NDimChange::Translation(r(1, 2)), NDimChange::Translation(r(-7, 3))] {
        inv.extend(check_form_invariance(&form, &ch, &cfgs));
    }
    let all = [&round, &rep, &comm, &inv];
    outcome(
        all.iter().all(|x| x.all_pass()),
        format!("round trips {}, representation {}, commutators {}, invariance {}", round.checks.len(), rep.checks.len(), comm.checks.len(), inv.checks.len()),
    )
}

fn sewing() -> Outcome {
    let rep = check_sewing(&[r(2, 1), r(1, 3), ExactScalar::gaussian(1, 2, -3, 4)]);
    outcome(rep.all_pass() && rep.checks.len() == 9, format!("{} domain and partner checks {}", rep.checks.len(), failures(&rep)))
}

fn partition() -> Outcome {
    let setup = SplitSetup {
        states: vec![a(), a()],
        points: vec![r(2, 1), r(1, 4)],
        cfg: sewn(r(1, 16), r(1, 4)),
        lmax: LEVEL,
        pairing: PairingMode::default_xi(),
    };
    let rep = partition_independence(&setup, &DualVector::vacuum());
    outcome(rep.all_pass(), format!("splits 0|2, 1|1, 2|0 {}", failures(&rep)))
}

fn determinism() -> Outcome {
    let dir = std::env::temp_dir().join(format!("voxform-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let config = dir.join("run.cfg");
    std::fs::write(&config, "[voa]\ncutoff = 6\nlevel = 12\n[sewing]\nepsilon = 1/64, 1/16, 1/4\n").unwrap();
    let mut outputs = Vec::new();
    for k in 0..2 {
        let out = dir.join(format!("report{k}.json"));
        let csv = dir.join(format!("levels{k}.csv"));
        let status = Process::new(env!("CARGO_BIN_EXE_voxform"))
            .args(["product", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(&out)
            .arg("--csv")
            .arg(&csv)
            .stderr(std::process::Stdio::null())
            .status()
            .unwrap();
        outputs.push((status.code(), std::fs::read(&out).unwrap(), std::fs::read(&csv).unwrap()));
    }
    let same = outputs[0] == outputs[1];
    // in-process runs agree with each other too
    let cfg = RunConfig::default();
    let j1 = run(Command::Sewing, &cfg, &["sewing"], &FaultSet::default()).to_json();
    let j2 = run(Command::Sewing, &cfg, &["sewing"], &FaultSet::default()).to_json();
    let _ = std::fs::remove_dir_all(&dir);
    outcome(same && j1 == j2 && outputs[0].0 == Some(0), format!("two product runs byte-identical: {same}"))
}

fn main() -> std::process::ExitCode {
    let started = std::time::Instant::now();
    let results: Vec<(u32, &str, Outcome, Option<bool>)> = std::thread::scope(|s| {
        let h1 = s.spawn(axioms);
        let h2 = s.spawn(two_point);
        let h3 = s.spawn(bilinear_form);
        let h4 = s.spawn(eps_product);
        let h5 = s.spawn(cauchy);
        let h6 = s.spawn(coboundary_criterion);
        let h7 = s.spawn(leibniz);
        let h8 = s.spawn(exceptional);
        let h9 = s.spawn(coordinates);
        let h10 = s.spawn(sewing);
        let h11 = s.spawn(partition);
        let h12 = s.spawn(determinism);
        let (o2, f2) = h2.join().unwrap();
        let (o6, f6) = h6.join().unwrap();
        vec![
            (1, "vertex algebra axioms", h1.join().unwrap(), None),
            (2, "two-point convergence", o2, Some(f2)),
            (3, "bilinear form", h3.join().unwrap(), None),
            (4, "epsilon-product against oracle", h4.join().unwrap(), None),
            (5, "Cauchy-bound shape", h5.join().unwrap(), None),
            (6, "coboundary and shuffles", o6, Some(f6)),
            (7, "Leibniz law", h7.join().unwrap(), None),
            (8, "exceptional complex", h8.join().unwrap(), None),
            (9, "coordinate changes", h9.join().unwrap(), None),
            (10, "sewing domain", h10.join().unwrap(), None),
            (11, "partition independence", h11.join().unwrap(), None),
            (12, "determinism", h12.join().unwrap(), None),
        ]
    });
    for (k, name, o, _) in &results {
        println!("criterion {k:>2} {:<4} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("acceptance run took {:.1}s", started.elapsed().as_secs_f64());
    let mut deviations = 0;
    for (k, name, o, known) in &results {
        // unattainable as pinned: the failure must be exactly the derived one
        let expected = match known {
            Some(faithful) => *faithful && !o.pass,
            None => o.pass,
        };
        if !expected {
            eprintln!("criterion {k} ({name}) deviates from its expected outcome");
            deviations += 1;
        }
    }
    println!("{} criteria pass, {} fail as derived, {deviations} unexpected", results.iter().filter(|r| r.2.pass).count(), results.iter().filter(|r| !r.2.pass).count() - deviations);
    if deviations == 0 {
        std::process::ExitCode::SUCCESS
    } else {
        std::process::ExitCode::FAILURE
    }
}
