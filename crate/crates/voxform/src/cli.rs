//! Command-line driver: run configuration files, check suites, JSON reports and CSV output.
//!
//! A configuration is a UTF-8 file of `[section]` headers and `key = value` lines. Scalars are
//! written `p/q` or `p/q+r/s i`; lists are comma separated; `#` starts a comment.

use std::fmt::Write as _;
use std::str::FromStr;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::complex::{
    coboundary, coboundary_value, cochain_product, delta_ex_check, delta_squared_check, exceptional_g, exceptional_region,
    leibniz_check, leibniz_configurations, stated_region, product_shuffle_check, shuffle_check, Cochain, ExceptionalTerm,
    PairCentres, ProductSetup,
};
use crate::coords::{
    beta_from_a, check_commutators, check_form_invariance, check_representation, check_round_trip, representation_family,
    sample_series, NDimChange,
};
use crate::error::VoxError;
use crate::forms::{sample_configurations, WForm};
use crate::pairing::{check_pairing, BilinearForm};
use crate::product::{
    cauchy_report, epsilon_product, partition_independence, product_l0_conjugation, product_partial_derivative, SplitSetup,
    EpsProductSpec, PairingMode,
};
use crate::report::{Check, Report, Status};
use crate::scalars::{dyadic_decimal, geometric_tail_bound, ApproxScalar, ExactScalar, Precision};
use crate::sewing::{check_sewing, validate_config, SphereConfig};
use crate::voa::{check_axioms_with, AxiomOptions, DualVector, GradedVector, LevelSeries, PartitionState, VOAContext};

/// Version of the JSON report layout.
pub const SCHEMA_VERSION: u32 = 1;

/// Failures of the command-line layer; all of them exit with status 2.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config line {line}: {msg}")]
    Config { line: usize, msg: String },
    #[error("invalid run configuration: {0}")]
    Invalid(String),
    #[error("unknown suite '{suite}' for command {command} (available: {available})")]
    UnknownSuite { suite: String, command: &'static str, available: String },
    #[error("unknown fault '{0}' (available: {faults})", faults = FAULTS.join(", "))]
    UnknownFault(String),
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Engine(#[from] VoxError),
}

/// The five subcommands.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Axioms,
    Product,
    Complex,
    Coords,
    Sewing,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Axioms => "axioms",
            Command::Product => "product",
            Command::Complex => "complex",
            Command::Coords => "coords",
            Command::Sewing => "sewing",
        }
    }

    /// Suites in the order they run.
    pub fn suites(self) -> &'static [&'static str] {
        match self {
            Command::Axioms => &["axioms", "pairing"],
            Command::Product => &["sweep", "cauchy", "partition", "props"],
            Command::Complex => &["coboundary", "delta_squared", "shuffle", "product", "leibniz", "exceptional"],
            Command::Coords => &["round_trip", "representation", "commutator", "invariance"],
            Command::Sewing => &["sewing"],
        }
    }
}

/// Fault identifiers accepted by `--inject-fault`.
pub const FAULTS: &[&str] = &["axioms.bracket", "complex.leibniz_sign"];

/// Deliberate corruptions, used to show that checks can fail.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FaultSet {
    pub corrupt_bracket: bool,
    pub flip_leibniz_sign: bool,
}

impl FaultSet {
    pub fn parse(ids: &[String]) -> Result<Self, CliError> {
        let mut f = FaultSet::default();
        for id in ids {
            match id.as_str() {
                "axioms.bracket" => f.corrupt_bracket = true,
                "complex.leibniz_sign" => f.flip_leibniz_sign = true,
                other => return Err(CliError::UnknownFault(other.to_string())),
            }
        }
        Ok(f)
    }
}

/// Sewing parameters shared by the product and complex commands.
#[derive(Clone, Debug, PartialEq)]
pub struct SewingParams {
    pub r1: BigRational,
    pub r2: BigRational,
    pub epsilons: Vec<ExactScalar>,
    pub zeta1: ExactScalar,
    pub pairing: PairingMode,
}

/// Slot lists and native points of the swept product.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductParams {
    pub left: Vec<GradedVector>,
    pub right: Vec<GradedVector>,
    pub x_points: Vec<ExactScalar>,
    pub y_points: Vec<ExactScalar>,
}

/// Parameters of the complex command.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexParams {
    pub epsilon: ExactScalar,
    pub leibniz_level: u32,
    pub configurations: usize,
    pub seed: u64,
    /// `(z₁, z₂, z₃, ζ)` for the two exceptional groups and a point that satisfies only the stated inequalities.
    pub first_group: [ExactScalar; 4],
    pub second_group: [ExactScalar; 4],
    pub stated_only: [ExactScalar; 4],
}

/// Parameters of the coords command.
#[derive(Clone, Debug, PartialEq)]
pub struct CoordsParams {
    pub order: usize,
    pub series: usize,
    pub configurations: usize,
    pub seed: u64,
}

/// Thresholds for certificates assembled by the driver.
#[derive(Clone, Debug, PartialEq)]
pub struct Tolerances {
    /// Largest accepted fitted decay ratio in the ε sweep.
    pub ratio_max: BigRational,
    /// Largest accepted Cauchy shape constant.
    pub cauchy_constant: BigRational,
}

/// Everything a run needs.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub cutoff: u32,
    pub level: u32,
    pub samples: Vec<Vec<ExactScalar>>,
    pub sewing: SewingParams,
    pub product: ProductParams,
    pub complex: ComplexParams,
    pub coords: CoordsParams,
    pub tolerance: Tolerances,
    /// `None` runs every suite of the command.
    pub suites: Option<Vec<String>>,
}

fn q(p: i64, d: i64) -> ExactScalar {
    ExactScalar::ratio(p, d)
}

fn rat(p: i64, d: i64) -> BigRational {
    BigRational::new(p.into(), d.into())
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            cutoff: 6,
            level: 12,
            samples: vec![vec![q(4, 1), q(2, 1)], vec![q(17, 4), q(3, 1), q(1, 1)]],
            sewing: SewingParams {
                r1: BigRational::one(),
                r2: BigRational::one(),
                epsilons: vec![q(1, 64), q(1, 16), q(1, 4)],
                zeta1: q(1, 4),
                pairing: PairingMode::default_xi(),
            },
            product: ProductParams {
                left: vec![GradedVector::generator()],
                right: vec![GradedVector::generator()],
                x_points: vec![q(2, 1)],
                y_points: vec![q(3, 1)],
            },
            complex: ComplexParams {
                epsilon: q(1, 16),
                leibniz_level: 8,
                configurations: 5,
                seed: 7,
                first_group: [q(6, 1), q(3, 2), q(3, 4), q(1, 1)],
                second_group: [q(11, 2), q(21, 4), q(1, 1), q(5, 1)],
                stated_only: [q(4, 1), q(2, 1), q(-3, 1), q(1, 1)],
            },
            coords: CoordsParams { order: 6, series: 20, configurations: 10, seed: 11 },
            tolerance: Tolerances { ratio_max: rat(1, 2), cauchy_constant: rat(4, 1) },
            suites: None,
        }
    }
}

/// `vac`, `a`, `omega`, `zero`, or `p3.1.1` for `a(−3)a(−1)a(−1)𝟏`.
pub fn parse_state(s: &str) -> Result<GradedVector, String> {
    match s.trim() {
        "vac" => Ok(GradedVector::vacuum()),
        "a" => Ok(GradedVector::generator()),
        "omega" => Ok(GradedVector::conformal()),
        "zero" => Ok(GradedVector::zero()),
        other => {
            let body = other.strip_prefix('p').ok_or_else(|| format!("unknown state '{other}'"))?;
            let parts: Vec<u32> = body
                .split('.')
                .map(|p| p.parse::<u32>().ok().filter(|&n| n > 0))
                .collect::<Option<_>>()
                .ok_or_else(|| format!("bad partition '{other}'"))?;
            Ok(GradedVector::basis(PartitionState::new(parts)))
        }
    }
}

fn split_list(v: &str) -> impl Iterator<Item = &str> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty())
}

fn scalar(v: &str) -> Result<ExactScalar, String> {
    ExactScalar::from_str(v).map_err(|e| e.to_string())
}

fn scalars(v: &str) -> Result<Vec<ExactScalar>, String> {
    split_list(v).map(scalar).collect()
}

fn real(v: &str) -> Result<BigRational, String> {
    let z = scalar(v)?;
    if !z.im().is_zero() {
        return Err(format!("'{v}' must be real"));
    }
    Ok(z.re().clone())
}

fn count<T: FromStr>(v: &str) -> Result<T, String> {
    v.trim().parse::<T>().map_err(|_| format!("bad integer '{}'", v.trim()))
}

fn four(v: &str) -> Result<[ExactScalar; 4], String> {
    scalars(v)?.try_into().map_err(|_| "expected four scalars z1, z2, z3, zeta".to_string())
}

impl RunConfig {
    /// Parses a configuration; absent keys keep their defaults.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut cfg = RunConfig::default();
        let mut section = String::new();
        let mut samples: Option<Vec<Vec<ExactScalar>>> = None;
        let mut pairing_mode: Option<String> = None;
        let mut xi: Option<ExactScalar> = None;
        let mut lambda_sq: Option<ExactScalar> = None;
        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let err = |msg: String| CliError::Config { line, msg };
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(name) = content.strip_prefix('[') {
                section = name.strip_suffix(']').ok_or_else(|| err("unterminated section header".into()))?.trim().to_string();
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| err(format!("expected key = value, got '{content}'")))?;
            let (key, value) = (key.trim(), value.trim());
            let done: Result<(), String> = match (section.as_str(), key) {
                ("voa", "cutoff") => count(value).map(|n| cfg.cutoff = n),
                ("voa", "level") => count(value).map(|n| cfg.level = n),
                ("points", "sample") => scalars(value).map(|t| samples.get_or_insert_with(Vec::new).push(t)),
                ("sewing", "r1") => real(value).map(|r| cfg.sewing.r1 = r),
                ("sewing", "r2") => real(value).map(|r| cfg.sewing.r2 = r),
                ("sewing", "epsilon") => scalars(value).map(|e| cfg.sewing.epsilons = e),
                ("sewing", "zeta1") => scalar(value).map(|z| cfg.sewing.zeta1 = z),
                ("sewing", "pairing") => {
                    pairing_mode = Some(value.to_string());
                    Ok(())
                }
                ("sewing", "xi") => scalar(value).map(|z| xi = Some(z)),
                ("sewing", "lambda_sq") => scalar(value).map(|z| lambda_sq = Some(z)),
                ("product", "left") => split_list(value).map(parse_state).collect::<Result<_, _>>().map(|s| cfg.product.left = s),
                ("product", "right") => split_list(value).map(parse_state).collect::<Result<_, _>>().map(|s| cfg.product.right = s),
                ("product", "x") => scalars(value).map(|p| cfg.product.x_points = p),
                ("product", "y") => scalars(value).map(|p| cfg.product.y_points = p),
                ("complex", "epsilon") => scalar(value).map(|e| cfg.complex.epsilon = e),
                ("complex", "leibniz_level") => count(value).map(|n| cfg.complex.leibniz_level = n),
                ("complex", "configurations") => count(value).map(|n| cfg.complex.configurations = n),
                ("complex", "seed") => count(value).map(|n| cfg.complex.seed = n),
                ("complex", "first_group") => four(value).map(|p| cfg.complex.first_group = p),
                ("complex", "second_group") => four(value).map(|p| cfg.complex.second_group = p),
                ("complex", "stated_only") => four(value).map(|p| cfg.complex.stated_only = p),
                ("coords", "order") => count(value).map(|n| cfg.coords.order = n),
                ("coords", "series") => count(value).map(|n| cfg.coords.series = n),
                ("coords", "configurations") => count(value).map(|n| cfg.coords.configurations = n),
                ("coords", "seed") => count(value).map(|n| cfg.coords.seed = n),
                ("tolerance", "ratio_max") => real(value).map(|r| cfg.tolerance.ratio_max = r),
                ("tolerance", "cauchy_constant") => real(value).map(|r| cfg.tolerance.cauchy_constant = r),
                ("run", "suites") => {
                    cfg.suites = Some(split_list(value).map(str::to_string).collect());
                    Ok(())
                }
                ("", _) => Err(format!("key '{key}' outside any section")),
                (s, k) => Err(format!("unknown key '{k}' in section [{s}]")),
            };
            done.map_err(err)?;
        }
        if let Some(s) = samples {
            cfg.samples = s;
        }
        cfg.sewing.pairing = match pairing_mode.as_deref().unwrap_or("from-epsilon") {
            "from-epsilon" => PairingMode::FromEpsilon { xi: xi.unwrap_or_else(ExactScalar::i) },
            "fixed" => PairingMode::Fixed {
                lambda_sq: lambda_sq.ok_or_else(|| CliError::Invalid("pairing = fixed needs lambda_sq".into()))?,
            },
            other => return Err(CliError::Invalid(format!("pairing mode '{other}' (expected from-epsilon or fixed)"))),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Sample tuples are pairwise distinct and every ε lies within the radius product.
    pub fn validate(&self) -> Result<(), CliError> {
        for (k, t) in self.samples.iter().enumerate() {
            if (0..t.len()).any(|i| (0..i).any(|j| t[i] == t[j])) {
                return Err(CliError::Invalid(format!("sample tuple {k} has coincident points")));
            }
        }
        if !self.sewing.r1.is_positive() || !self.sewing.r2.is_positive() {
            return Err(CliError::Invalid("radii must be positive".into()));
        }
        let bound = &self.sewing.r1 * &self.sewing.r2;
        for e in self.sewing.epsilons.iter().chain([&self.complex.epsilon]) {
            if e.is_zero() || e.norm_sqr() > &bound * &bound {
                return Err(CliError::Invalid(format!("epsilon {e} is zero or exceeds r1*r2")));
            }
        }
        if self.cutoff == 0 || self.level == 0 {
            return Err(CliError::Invalid("cutoff and level must be positive".into()));
        }
        Ok(())
    }

    /// Distinct entries of all sample tuples, in order.
    pub fn flat_samples(&self) -> Vec<ExactScalar> {
        let mut out: Vec<ExactScalar> = Vec::new();
        for z in self.samples.iter().flatten() {
            if !out.contains(z) {
                out.push(z.clone());
            }
        }
        out
    }

    fn tuple(&self, len: usize) -> Option<&Vec<ExactScalar>> {
        self.samples.iter().find(|t| t.len() == len)
    }

    fn sphere(&self, epsilon: &ExactScalar) -> Result<SphereConfig, VoxError> {
        SphereConfig::with_partner(self.sewing.r1.clone(), self.sewing.r2.clone(), epsilon.clone(), self.sewing.zeta1.clone())
    }

    fn product_spec(&self, epsilon: &ExactScalar) -> Result<EpsProductSpec, VoxError> {
        let p = &self.product;
        let cfg = self.sphere(epsilon)?.with_points(p.x_points.clone(), p.y_points.clone());
        let mut spec = EpsProductSpec::new(
            WForm::correlator(p.left.clone(), GradedVector::vacuum(), self.level),
            WForm::correlator(p.right.clone(), GradedVector::vacuum(), self.level),
            cfg,
            self.level,
        );
        spec.pairing = self.sewing.pairing.clone();
        Ok(spec)
    }
}

/// Suites selected for a command; `--suite` wins over the configuration.
pub fn select_suites(command: Command, cfg: &RunConfig, cli: Option<&[String]>) -> Result<Vec<&'static str>, CliError> {
    let available = command.suites();
    let Some(chosen) = cli.or(cfg.suites.as_deref()) else {
        return Ok(available.to_vec());
    };
    let mut out = Vec::new();
    for s in chosen.iter().map(|s| s.trim()).filter(|s| !s.is_empty()) {
        let known = available.iter().find(|a| **a == s).ok_or_else(|| CliError::UnknownSuite {
            suite: s.to_string(),
            command: command.name(),
            available: available.join(","),
        })?;
        if !out.contains(known) {
            out.push(*known);
        }
    }
    // run in the command's own order regardless of how they were listed
    out.sort_by_key(|s| available.iter().position(|a| a == s));
    Ok(out)
}

/// The outcome of one command.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub command: Command,
    pub report: Report,
    /// CSV text for the product command.
    pub csv: Option<String>,
}

#[derive(Serialize)]
struct JsonReport<'a> {
    schema_version: u32,
    command: &'a str,
    checks: &'a [Check],
}

impl Outcome {
    /// Deterministic JSON: checks sorted by id, no timings.
    pub fn to_json(&self) -> String {
        let doc = JsonReport { schema_version: SCHEMA_VERSION, command: self.command.name(), checks: &self.report.checks };
        let mut s = serde_json::to_string_pretty(&doc).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn exit_code(&self) -> i32 {
        if self.report.checks.iter().any(|c| c.status == Status::Fail) {
            1
        } else {
            0
        }
    }

    pub fn summary(&self) -> String {
        let n = |st: Status| self.report.checks.iter().filter(|c| c.status == st).count();
        format!("{}: {} checks, {} pass, {} fail, {} skip", self.command.name(), self.report.checks.len(), n(Status::Pass), n(Status::Fail), n(Status::Skip))
    }
}

/// Runs the selected suites of a command.
pub fn run(command: Command, cfg: &RunConfig, suites: &[&str], faults: &FaultSet) -> Outcome {
    let mut report = Report::new();
    let mut csv = None;
    for &suite in suites {
        match (command, suite) {
            (Command::Axioms, "axioms") => report.extend(axioms_suite(cfg, faults)),
            (Command::Axioms, "pairing") => report.extend(pairing_suite(cfg)),
            (Command::Product, "sweep") => {
                let (rep, text) = sweep_suite(cfg);
                report.extend(rep);
                csv = Some(text);
            }
            (Command::Product, "cauchy") => report.extend(cauchy_suite(cfg)),
            (Command::Product, "partition") => report.extend(partition_suite(cfg)),
            (Command::Product, "props") => report.extend(props_suite(cfg)),
            (Command::Complex, "coboundary") => report.extend(coboundary_suite(cfg)),
            (Command::Complex, "delta_squared") => report.extend(delta_squared_suite(cfg)),
            (Command::Complex, "shuffle") => report.extend(shuffle_suite(cfg)),
            (Command::Complex, "product") => report.extend(product_cochain_suite(cfg)),
            (Command::Complex, "leibniz") => report.extend(leibniz_suite(cfg, faults)),
            (Command::Complex, "exceptional") => report.extend(exceptional_suite(cfg)),
            (Command::Coords, "round_trip") => report.extend(round_trip_suite(cfg)),
            (Command::Coords, "representation") => {
                report.extend(check_representation(&VOAContext::build_heisenberg(cfg.cutoff), &representation_family(cfg.coords.order)))
            }
            (Command::Coords, "commutator") => report.extend(check_commutators(3.min(cfg.cutoff), 2, &q(2, 1), 3.min(cfg.cutoff))),
            (Command::Coords, "invariance") => report.extend(invariance_suite(cfg)),
            (Command::Sewing, "sewing") => report.extend(check_sewing(&cfg.flat_samples())),
            (c, s) => unreachable!("suite {s} is not part of {}", c.name()),
        }
    }
    report.sort_by_id();
    Outcome { command, report, csv }
}

/// Renames check ids that start with `from` to start with `to`.
fn retag(mut rep: Report, from: &str, to: &str) -> Report {
    for c in rep.checks.iter_mut() {
        if let Some(rest) = c.id.strip_prefix(from) {
            c.id = format!("{to}{rest}");
        }
    }
    rep
}

fn axioms_suite(cfg: &RunConfig, faults: &FaultSet) -> Report {
    let ctx = VOAContext::build_heisenberg(cfg.cutoff);
    let opts = AxiomOptions { corrupt_bracket: faults.corrupt_bracket, ..AxiomOptions::for_context(&ctx) };
    check_axioms_with(&ctx, &cfg.flat_samples(), &opts)
}

fn pairing_suite(cfg: &RunConfig) -> Report {
    let ctx = VOAContext::build_heisenberg(cfg.cutoff);
    let eps = cfg.sewing.epsilons.first().cloned().unwrap_or_else(ExactScalar::one);
    match BilinearForm::new(cfg.cutoff, cfg.sewing.pairing.lambda_sq(&eps)) {
        Ok(form) => check_pairing(&ctx, &form, 3.min(cfg.cutoff), 3, 4.min(cfg.cutoff)),
        Err(e) => {
            let mut rep = Report::new();
            rep.push(Check::error("pairing.form", "the invariant form is nondegenerate", &e));
            rep
        }
    }
}

/// Exact decimal of a real scalar, or its `p/q ± r/s i` literal.
fn scalar_text(z: &ExactScalar) -> String {
    if z.im().is_zero() {
        dyadic_decimal(z.re())
    } else {
        z.to_string()
    }
}

fn sweep_suite(cfg: &RunConfig) -> (Report, String) {
    let prec = Precision::from_env();
    let mut rep = Report::new();
    let mut csv = String::from("epsilon,level,abs_coefficient,tail_bound\n");
    let ratio_max = ApproxScalar::from_rational(&cfg.tolerance.ratio_max, prec);
    let anchor = "level coefficients of the product decay geometrically";
    let mut tails: Vec<(BigRational, ApproxScalar)> = Vec::new();
    for (k, eps) in cfg.sewing.epsilons.iter().enumerate() {
        let id = format!("product.sweep.eps{k}");
        let run = || -> Result<(Vec<ExactScalar>, LevelSeries), VoxError> {
            let (_, conv) = epsilon_product(&cfg.product_spec(eps)?, &DualVector::vacuum())?;
            let mut pow = ExactScalar::one();
            let mut terms = Vec::new();
            for c in &conv.levels {
                terms.push(c * &pow);
                pow = pow * eps;
            }
            Ok((conv.levels, LevelSeries::from_levels(terms)))
        };
        match run() {
            Ok((levels, series)) => {
                let cert = series.certify(prec);
                for (l, c) in levels.iter().enumerate() {
                    let tail = match &cert {
                        Ok(ct) if ct.scale.to_f64() == 0.0 => "0".to_string(),
                        Ok(ct) => geometric_tail_bound(&ct.scale, &ApproxScalar::one(prec).div(&ct.ratio), l as u32)
                            .map(|t| t.decimal_string())
                            .unwrap_or_else(|_| "uncertified".into()),
                        Err(_) => "uncertified".to_string(),
                    };
                    let modulus = ApproxScalar::from_exact(c, prec).abs().decimal_string();
                    let _ = writeln!(csv, "{},{l},{modulus},{tail}", scalar_text(eps));
                }
                match cert {
                    Ok(ct) => {
                        tails.push((eps.norm_sqr(), ct.tail.clone()));
                        rep.push(
                            Check::bounded(&id, anchor, &ct.ratio, &ratio_max)
                                .with_detail(format!("epsilon={eps} ratio={} tail={}", ct.ratio.sci_string(), ct.tail.sci_string())),
                        );
                    }
                    Err(e) => rep.push(Check::error(&id, anchor, &e)),
                }
            }
            Err(e) => rep.push(Check::error(&id, anchor, &e)),
        }
    }
    tails.sort_by(|a, b| a.0.cmp(&b.0));
    let monotone = tails.windows(2).all(|w| w[0].1.cmp_re(&w[1].1) != std::cmp::Ordering::Greater);
    rep.push(Check::predicate("product.sweep.monotone", "truncation tails grow with the sewing parameter", monotone));
    // the radius-product boundary: informational, the outcome is recorded either way
    let boundary = || -> Result<String, VoxError> {
        let eps = ExactScalar::real(&cfg.sewing.r1 * &cfg.sewing.r2);
        let sphere = SphereConfig::with_partner(cfg.sewing.r1.clone(), cfg.sewing.r2.clone(), eps.clone(), ExactScalar::real(cfg.sewing.r1.clone()))?;
        let mut spec = cfg.product_spec(&eps)?;
        spec.cfg = sphere.with_points(cfg.product.x_points.clone(), cfg.product.y_points.clone());
        let (_, conv) = epsilon_product(&spec, &DualVector::vacuum())?;
        Ok(format!("certified at epsilon = r1*r2 with ratio {}", conv.ratio.map(|r| r.sci_string()).unwrap_or_default()))
    };
    let detail = match boundary() {
        Ok(s) => s,
        Err(e) => format!("expected negative: {e}"),
    };
    rep.push(Check::skip("product.sweep.boundary", "behaviour at the radius-product boundary", &detail));
    (rep, csv)
}

fn cauchy_suite(cfg: &RunConfig) -> Report {
    let prec = Precision::from_env();
    let constant = ApproxScalar::from_rational(&cfg.tolerance.cauchy_constant, prec);
    let mut rep = Report::new();
    for (k, eps) in cfg.sewing.epsilons.iter().enumerate() {
        let r = cfg.product_spec(eps).and_then(|spec| cauchy_report(&spec, &DualVector::vacuum(), &constant));
        match r {
            Ok(conv) => rep.extend(retag(conv.checks, "cauchy.", &format!("product.cauchy.eps{k}."))),
            Err(e) => rep.push(Check::error(&format!("product.cauchy.eps{k}"), "level coefficients obey a Cauchy bound", &e)),
        }
    }
    rep
}

fn partition_suite(cfg: &RunConfig) -> Report {
    let mut rep = Report::new();
    let Some(eps) = cfg.sewing.epsilons.first() else {
        return rep;
    };
    let sphere = match cfg.sphere(eps) {
        Ok(s) => s,
        Err(e) => {
            rep.push(Check::error("product.partition", "the product does not depend on how the slot list is split", &e));
            return rep;
        }
    };
    let mut states = cfg.product.left.clone();
    states.extend(cfg.product.right.iter().cloned());
    // all slots in the left coordinate: left points as given, right points moved inside the sewing disk
    let mut points = cfg.product.x_points.clone();
    let zeta1 = &cfg.sewing.zeta1;
    for (j, _) in cfg.product.right.iter().enumerate() {
        points.push(ExactScalar::ratio(1, 1 + j as i64) * zeta1);
    }
    let setup = SplitSetup { states, points, cfg: sphere, lmax: cfg.level, pairing: cfg.sewing.pairing.clone() };
    retag(partition_independence(&setup, &DualVector::vacuum()), "partition.", "product.partition.")
}

fn props_suite(cfg: &RunConfig) -> Report {
    let mut rep = Report::new();
    let Some(eps) = cfg.sewing.epsilons.first() else {
        return rep;
    };
    match cfg.product_spec(eps) {
        Ok(spec) => {
            for slot in 0..spec.native_points().len() {
                for c in product_partial_derivative(&spec, &DualVector::vacuum(), slot).checks {
                    // the summed check does not depend on the slot
                    if rep.get(&c.id).is_none() {
                        rep.push(c);
                    }
                }
            }
            rep.extend(product_l0_conjugation(&spec, &DualVector::vacuum(), &q(2, 1)));
        }
        Err(e) => rep.push(Check::error("product.props", "product properties", &e)),
    }
    rep
}

/// Correlator-built cochains used by the complex command, with the states added by `δ²`.
fn cochains(cfg: &RunConfig) -> Vec<(&'static str, Cochain, [GradedVector; 2])> {
    let a = GradedVector::generator;
    let w = GradedVector::conformal;
    let e = |states: Vec<GradedVector>, m: u32| Cochain::correlator(states, GradedVector::vacuum(), m, 2 * cfg.level);
    vec![
        ("vacuum", e(vec![], 3), [a(), a()]),
        ("generator", e(vec![a()], 2), [a(), a()]),
        ("conformal", e(vec![w()], 2), [a(), w()]),
        ("pair", e(vec![a(), a()], 2), [a(), a()]),
    ]
}

fn coboundary_suite(cfg: &RunConfig) -> Report {
    let mut rep = Report::new();
    let anchor = "the coboundary raises arity by one and uses one composable insertion";
    for (name, c, extra) in cochains(cfg) {
        let id = format!("complex.coboundary.bidegree.{name}");
        let mut states = c.form.states();
        states.push(extra[0].clone());
        let (n, m) = c.bidegree();
        let r = coboundary(&c, states).map(|d| Check::predicate(&id, anchor, d.bidegree() == (n + 1, m - 1)));
        rep.push_result(&id, anchor, r);
    }
    let spent = Cochain::correlator(vec![GradedVector::generator()], GradedVector::vacuum(), 0, cfg.level);
    let refused = matches!(coboundary(&spent, vec![GradedVector::generator(); 2]), Err(VoxError::InvalidArgument(_)));
    rep.push(Check::predicate("complex.coboundary.spent", "a form with no composable insertion has no coboundary", refused));
    // δ of the one-point generator correlator is the two-point correlator
    let id = "complex.coboundary.odd_arity";
    let anchor = "the coboundary of an odd-arity correlator cochain is the next correlator";
    if let Some(pts) = cfg.tuple(2) {
        let a = GradedVector::generator();
        let c = Cochain::correlator(vec![a.clone()], GradedVector::vacuum(), 2, 2 * cfg.level);
        let two = Cochain::correlator(vec![a.clone(), a.clone()], GradedVector::vacuum(), 1, 2 * cfg.level);
        let r = coboundary_value(&c, &a, &DualVector::vacuum(), pts)
            .and_then(|d| Ok(Check::exact(id, anchor, &(d - two.value(&DualVector::vacuum(), pts)?))));
        rep.push_result(id, anchor, r);
    } else {
        rep.push(Check::skip(id, anchor, "no two-point sample tuple"));
    }
    rep
}

fn delta_squared_suite(cfg: &RunConfig) -> Report {
    let mut rep = Report::new();
    for (name, c, extra) in cochains(cfg) {
        let prefix = format!("complex.delta_squared.{name}.");
        match cfg.tuple(c.arity() + 2) {
            Some(pts) => rep.extend(retag(delta_squared_check(&c, &extra, &DualVector::vacuum(), pts), "complex.delta_squared.", &prefix)),
            None => rep.push(Check::skip(&format!("{prefix}exact"), "the coboundary squares to zero", "no sample tuple of matching length")),
        }
    }
    rep
}

fn shuffle_suite(cfg: &RunConfig) -> Report {
    let mut rep = Report::new();
    let a = GradedVector::generator;
    let vac = DualVector::vacuum();
    let one = Cochain::correlator(vec![a()], GradedVector::vacuum(), 1, 2 * cfg.level);
    if let Some(pts) = cfg.tuple(1).or(cfg.samples.first()) {
        rep.extend(shuffle_check(&one, 1, &vac, &pts[..1]));
    }
    for n in [2usize, 3] {
        let c = Cochain::correlator(vec![a(); n], GradedVector::vacuum(), 1, 2 * cfg.level);
        match cfg.tuple(n) {
            Some(pts) => {
                for s in 1..n {
                    rep.extend(shuffle_check(&c, s, &vac, pts));
                }
            }
            None => rep.push(Check::skip(&format!("complex.shuffle.n{n}"), "signed sums over shuffles of the cochain vanish", "no sample tuple of matching length")),
        }
    }
    rep
}

fn complex_setup(cfg: &RunConfig, lmax: u32) -> Result<ProductSetup, VoxError> {
    let mut setup = ProductSetup::new(cfg.sphere(&cfg.complex.epsilon)?, lmax);
    setup.pairing = cfg.sewing.pairing.clone();
    Ok(setup)
}

fn product_cochain_suite(cfg: &RunConfig) -> Report {
    let mut rep = Report::new();
    let anchor = "bidegrees add under the product";
    let a = GradedVector::generator;
    let c1 = Cochain::correlator(vec![a()], GradedVector::vacuum(), 1, cfg.level);
    let c2 = Cochain::correlator(vec![a()], GradedVector::vacuum(), 2, cfg.level);
    let setup = match complex_setup(cfg, cfg.level.min(10)) {
        Ok(s) => s,
        Err(e) => {
            rep.push(Check::error("complex.product.bidegree", anchor, &e));
            return rep;
        }
    };
    let r = cochain_product(&c1, &c2, &setup).map(|p| Check::predicate("complex.product.bidegree", anchor, p.bidegree() == (2, 3)));
    rep.push_result("complex.product.bidegree", anchor, r);
    let sweep = sample_configurations(2, 40, cfg.complex.seed);
    let at: Vec<Vec<ExactScalar>> = cfg.samples.iter().filter(|t| t.len() == 2).cloned().collect();
    rep.extend(product_shuffle_check(&c1, &c1, &setup, &DualVector::vacuum(), &sweep, &at));
    rep
}

fn leibniz_suite(cfg: &RunConfig, faults: &FaultSet) -> Report {
    let mut rep = Report::new();
    let setup = match complex_setup(cfg, cfg.complex.leibniz_level) {
        Ok(s) => s,
        Err(e) => {
            rep.push(Check::error("complex.leibniz", "the coboundary is a graded derivation of the product", &e));
            return rep;
        }
    };
    let a = GradedVector::generator;
    let w = GradedVector::conformal;
    let e = |n: usize| Cochain::correlator(vec![a(); n], GradedVector::vacuum(), 1, cfg.level);
    for (k, states) in [(1usize, vec![a(), w(), a()]), (2, vec![a(), w(), a(), w()])] {
        let cfgs = leibniz_configurations(k, 1, &setup.cfg.zeta1, cfg.complex.configurations, cfg.complex.seed + k as u64);
        rep.extend(leibniz_check(&e(k), &e(1), &setup, &DualVector::vacuum(), &states, &cfgs, faults.flip_leibniz_sign));
    }
    rep
}

fn exceptional_suite(cfg: &RunConfig) -> Report {
    let mut rep = Report::new();
    let a = GradedVector::generator;
    let c = Cochain::correlator(vec![a(), a()], GradedVector::vacuum(), 2, 2 * cfg.level);
    let anchor = "the exceptional combinations converge in their regions";
    for (name, which, p) in [("g1", ExceptionalTerm::First, &cfg.complex.first_group), ("g2", ExceptionalTerm::Second, &cfg.complex.second_group)] {
        let id = format!("complex.exceptional.{name}");
        let pts = [p[0].clone(), p[1].clone(), p[2].clone()];
        let stated = stated_region(which, &pts, &p[3]);
        let derived = exceptional_region(which, &pts, &p[3]);
        let r = exceptional_g(&c, which, &a(), &pts, &p[3], &DualVector::vacuum()).map(|conv| {
            let detail = format!(
                "stated region {stated}, convergence region {derived}, ratio {}",
                conv.ratio.as_ref().map(|r| r.sci_string()).unwrap_or_else(|| "none".into())
            );
            Check::predicate(&id, anchor, stated && conv.certified()).with_detail(detail)
        });
        rep.push_result(&id, anchor, r);
    }
    let p = &cfg.complex.stated_only;
    let pts = [p[0].clone(), p[1].clone(), p[2].clone()];
    let outcome = match exceptional_g(&c, ExceptionalTerm::First, &a(), &pts, &p[3], &DualVector::vacuum()) {
        Ok(conv) if conv.certified() => "certified".to_string(),
        Ok(_) => "not certified".to_string(),
        Err(e) => format!("expected negative: {e}"),
    };
    rep.push(Check::skip(
        "complex.exceptional.stated_only",
        "a point inside the stated inequalities but outside the convergence region",
        &format!("stated region {}, {outcome}", stated_region(ExceptionalTerm::First, &pts, &p[3])),
    ));
    if let Some(pts) = cfg.tuple(3) {
        let pts: [ExactScalar; 3] = [pts[0].clone(), pts[1].clone(), pts[2].clone()];
        let centres = [
            PairCentres { first: pts[1].clone(), second: pts[2].clone() },
            PairCentres { first: &pts[1] + &q(1, 16), second: &pts[2] - &q(1, 16) },
        ];
        let one = Cochain::correlator(vec![a()], GradedVector::vacuum(), 2, 2 * cfg.level);
        rep.extend(delta_ex_check(&one, &[a(), a(), GradedVector::conformal()], &pts, &centres, &DualVector::vacuum()));
    }
    rep
}

fn round_trip_suite(cfg: &RunConfig) -> Report {
    let mut rep = retag(
        check_round_trip(&sample_series(cfg.coords.series, cfg.coords.order, cfg.coords.seed)),
        "coords.round_trip",
        "coords.round_trip.series",
    );
    let mut degenerate = vec![ExactScalar::zero(), ExactScalar::one()];
    degenerate.resize(cfg.coords.order.max(2), ExactScalar::zero());
    let refused = matches!(beta_from_a(&degenerate), Err(VoxError::NotAnAutomorphism));
    rep.push(Check::predicate("coords.round_trip.degenerate", "a series without linear term is not a coordinate change", refused));
    rep
}

fn invariance_suite(cfg: &RunConfig) -> Report {
    let a = GradedVector::generator();
    let form = WForm::correlator(vec![a.clone(), a], GradedVector::vacuum(), cfg.level);
    let configurations = sample_configurations(2, cfg.coords.configurations, cfg.coords.seed);
    let mut rep = Report::new();
    for change in [NDimChange::Scaling(q(2, 1)), NDimChange::Scaling(q(-1, 3)), NDimChange::Translation(q(1, 1)), NDimChange::Translation(q(-5, 2))] {
        rep.extend(check_form_invariance(&form, &change, &configurations));
    }
    rep
}

/// Sewing data of a configuration, validated before a product run.
pub fn sewing_violations(cfg: &RunConfig) -> Vec<String> {
    cfg.sewing
        .epsilons
        .iter()
        .filter_map(|e| cfg.sphere(e).ok())
        .flat_map(|s| validate_config(&s).violations)
        .map(|v| v.to_string())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sections_and_literals() {
        let text = "\
# comment
[voa]
cutoff = 5
level = 10
[points]
sample = 3, 1
sample = 1/2+1/3 i, -2
[sewing]
epsilon = 1/16, 1/8
pairing = fixed
lambda_sq = -1/16
[product]
left = a, p2.1
right = zero
[run]
suites = sweep
";
        let cfg = RunConfig::parse(text).unwrap();
        assert_eq!((cfg.cutoff, cfg.level), (5, 10));
        assert_eq!(cfg.samples[1][0], ExactScalar::gaussian(1, 2, 1, 3));
        assert_eq!(cfg.sewing.epsilons, vec![q(1, 16), q(1, 8)]);
        assert_eq!(cfg.sewing.pairing, PairingMode::Fixed { lambda_sq: q(-1, 16) });
        assert_eq!(cfg.product.left[1], GradedVector::from_modes(&[2, 1]));
        assert!(cfg.product.right[0].is_zero());
        assert_eq!(cfg.suites, Some(vec!["sweep".to_string()]));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(RunConfig::parse("[voa]\ncutoff = x"), Err(CliError::Config { line: 2, .. })));
        assert!(matches!(RunConfig::parse("[voa]\nfoo = 1"), Err(CliError::Config { .. })));
        assert!(matches!(RunConfig::parse("[points]\nsample = 1, 1"), Err(CliError::Invalid(_))));
        assert!(matches!(RunConfig::parse("[sewing]\nepsilon = 2"), Err(CliError::Invalid(_))));
        assert!(matches!(FaultSet::parse(&["nope".into()]), Err(CliError::UnknownFault(_))));
        let cfg = RunConfig::default();
        assert!(matches!(select_suites(Command::Axioms, &cfg, Some(&["sweep".into()])), Err(CliError::UnknownSuite { .. })));
        assert!(select_suites(Command::Axioms, &cfg, Some(&[])).unwrap().is_empty());
    }

    #[test]
    fn empty_selection_is_an_empty_passing_report() {
        let out = run(Command::Complex, &RunConfig::default(), &[], &FaultSet::default());
        assert!(out.report.checks.is_empty());
        assert_eq!(out.exit_code(), 0);
        assert!(out.to_json().contains("\"schema_version\": 1"));
    }

    #[test]
    fn sewing_command_passes() {
        let cfg = RunConfig::default();
        let out = run(Command::Sewing, &cfg, &["sewing"], &FaultSet::default());
        assert_eq!(out.exit_code(), 0, "{:?}", out.report.failures());
        assert!(sewing_violations(&cfg).is_empty());
    }

    #[test]
    fn zero_form_gives_zero_csv() {
        let mut cfg = RunConfig::default();
        cfg.level = 4;
        cfg.product.left = vec![GradedVector::zero()];
        let out = run(Command::Product, &cfg, &["sweep"], &FaultSet::default());
        let csv = out.csv.unwrap();
        assert_eq!(csv.lines().count(), 1 + 3 * 5);
        assert!(csv.lines().skip(1).all(|l| l.split(',').nth(2) == Some("0")), "{csv}");
    }
}
