//! The ε-product of two forms: a dual-basis sum over sewing levels.

mod cauchy;
mod props;

pub use cauchy::{cauchy_estimate, cauchy_report, CauchyEstimate};
pub use props::{partition_independence, pole_structure, product_l0_conjugation, product_partial_derivative, SplitSetup};

use num_rational::BigRational;

use crate::error::{Result, VoxError};
use crate::forms::{certified, eval, translate_dual, ConvergenceReport, EvalMode, EvalOptions, Estimate, FormKind, Outer, Side, SlotInput, WForm};
use crate::pairing::{lambda_sq_from_epsilon, BilinearForm};
use crate::report::Report;
use crate::scalars::{ExactScalar, Precision};
use crate::sewing::{validate_config, SphereConfig};
use crate::voa::{virasoro_apply, Certificate, DualVector, GradedVector, LevelSeries};

/// Coordinates in which right-factor inputs are given.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RightChart {
    /// The right sphere's own coordinate `y`.
    Native,
    /// The left sphere's coordinate, identified through `(x+ζ₁)(y+ζ₂) = −ελ²`.
    Sewn,
}

/// How the pairing parameter is chosen.
#[derive(Clone, Debug, PartialEq)]
pub enum PairingMode {
    /// `λ = −ξ ε^{1/2}`, entering only through `λ² = ξ²ε`.
    FromEpsilon { xi: ExactScalar },
    /// A fixed `λ²`.
    Fixed { lambda_sq: ExactScalar },
}

impl PairingMode {
    pub fn lambda_sq(&self, epsilon: &ExactScalar) -> ExactScalar {
        match self {
            PairingMode::FromEpsilon { xi } => lambda_sq_from_epsilon(epsilon, xi),
            PairingMode::Fixed { lambda_sq } => lambda_sq.clone(),
        }
    }

    pub fn default_xi() -> Self {
        PairingMode::FromEpsilon { xi: ExactScalar::i() }
    }
}

/// Evaluator data of a product form.
#[derive(Clone, Debug)]
pub struct ProductSpec {
    pub left: FormKind,
    pub right: FormKind,
    pub left_arity: usize,
    pub zeta1: ExactScalar,
    pub zeta2: ExactScalar,
    pub epsilon: ExactScalar,
    pub r1: BigRational,
    pub r2: BigRational,
    pub lmax: u32,
    pub pairing: BilinearForm,
    pub chart: RightChart,
}

impl ProductSpec {
    /// `t = −ελ²` in the chart relation.
    pub fn chart_constant(&self) -> ExactScalar {
        -(&self.epsilon * self.pairing.lambda_sq())
    }

    /// Left coordinate to right coordinate.
    pub fn to_right(&self, x: &ExactScalar) -> Result<ExactScalar> {
        let d = x + &self.zeta1;
        if d.is_zero() {
            return Err(VoxError::OutOfRegion(format!("{x} is the sewing puncture")));
        }
        Ok(self.chart_constant() * d.inv()? - &self.zeta2)
    }

    /// Right coordinate to left coordinate.
    pub fn to_left(&self, y: &ExactScalar) -> Result<ExactScalar> {
        let d = y + &self.zeta2;
        if d.is_zero() {
            return Err(VoxError::OutOfRegion(format!("{y} is the sewing puncture")));
        }
        Ok(self.chart_constant() * d.inv()? - &self.zeta1)
    }

    /// `dx/dy` at a right-sphere point.
    pub fn jacobian(&self, y: &ExactScalar) -> Result<ExactScalar> {
        let d = y + &self.zeta2;
        Ok(-(self.chart_constant() * d.powi(2).inv()?))
    }
}

/// A product of two forms with its sewing configuration.
#[derive(Clone, Debug)]
pub struct EpsProductSpec {
    pub left: WForm,
    pub right: WForm,
    pub cfg: SphereConfig,
    pub lmax: u32,
    pub pairing: PairingMode,
}

impl EpsProductSpec {
    pub fn new(left: WForm, right: WForm, cfg: SphereConfig, lmax: u32) -> Self {
        EpsProductSpec { left, right, cfg, lmax, pairing: PairingMode::default_xi() }
    }

    pub fn lambda_sq(&self) -> ExactScalar {
        self.pairing.lambda_sq(&self.cfg.epsilon)
    }

    /// Evaluator data; the configuration must satisfy the sewing relation and radius bounds.
    pub fn kind_spec(&self, chart: RightChart) -> Result<ProductSpec> {
        let report = validate_config(&SphereConfig { x_points: vec![], y_points: vec![], ..self.cfg.clone() });
        if let Some(v) = report.violations.first() {
            return Err(VoxError::InvalidConfig(v.to_string()));
        }
        Ok(ProductSpec {
            left: self.left.kind.clone(),
            right: self.right.kind.clone(),
            left_arity: self.left.arity(),
            zeta1: self.cfg.zeta1.clone(),
            zeta2: self.cfg.zeta2.clone(),
            epsilon: self.cfg.epsilon.clone(),
            r1: self.cfg.r1.clone(),
            r2: self.cfg.r2.clone(),
            lmax: self.lmax,
            pairing: BilinearForm::new(self.lmax, self.lambda_sq())?,
            chart,
        })
    }

    /// The product as a `(k+n)`-point form.
    pub fn as_form(&self, chart: RightChart) -> Result<WForm> {
        let kind = FormKind::Product(Box::new(self.kind_spec(chart)?));
        let mut states = self.left.states();
        states.extend(self.right.states());
        Ok(WForm::new(kind, states, self.lmax.max(self.left.level).max(self.right.level)))
    }

    /// Native sample points `x ∪ y` from the configuration.
    pub fn native_points(&self) -> Vec<ExactScalar> {
        self.cfg.x_points.iter().chain(&self.cfg.y_points).cloned().collect()
    }

    fn check_points(&self) -> Result<()> {
        match validate_config(&self.cfg).violations.first() {
            Some(v) => Err(VoxError::InvalidConfig(v.to_string())),
            None => Ok(()),
        }
    }
}

/// Level data of one product evaluation.
#[derive(Clone, Debug)]
pub struct ProductEval {
    /// `Σ_l ε^l c_l` with its bound.
    pub value: Estimate,
    /// `c_l = Σ_u ⟨…F₁…u⟩⟨…F₂…ū⟩`, before the `ε^l` weight.
    pub levels: Vec<ExactScalar>,
    /// `ε^l c_l`.
    pub terms: LevelSeries,
    pub certificate: Option<Certificate>,
}

fn is_quasi_primary(v: &GradedVector) -> Option<u32> {
    let h = v.homogeneous_weight()?;
    virasoro_apply(1, v).is_zero().then_some(h)
}

/// Maps a right input to the right sphere's coordinate and returns the Jacobian weight factor.
fn transport(spec: &ProductSpec, input: &SlotInput) -> Result<(SlotInput, ExactScalar)> {
    let mut factor = ExactScalar::one();
    for (v, x) in input.leaves() {
        let h = is_quasi_primary(&v)
            .ok_or_else(|| VoxError::InvalidArgument("only quasi-primary homogeneous states move between spheres".into()))?;
        let y = spec.to_right(&x)?;
        factor = factor * spec.jacobian(&y)?.powi(h as i64);
    }
    let moved = input.map_points(&|x| spec.to_right(x))?;
    Ok((moved, factor.inv()?))
}

/// Partial sum of the product with inputs split after the left arity.
pub fn eval_product(spec: &ProductSpec, opts: &EvalOptions, wprime: &DualVector, outer: &[Outer], inputs: &[SlotInput]) -> Result<ProductEval> {
    if inputs.len() < spec.left_arity {
        return Err(VoxError::InvalidArgument(format!("{} inputs for a product with left arity {}", inputs.len(), spec.left_arity)));
    }
    let (left_in, right_in) = inputs.split_at(spec.left_arity);
    let left_outer: Vec<Outer> = outer.iter().filter(|o| o.side == Side::Left).cloned().collect();
    let mut right_outer: Vec<Outer> = outer.iter().filter(|o| o.side == Side::Right).cloned().collect();
    let mut right_inputs = right_in.to_vec();
    let mut jac = ExactScalar::one();
    if spec.chart == RightChart::Sewn {
        for o in right_outer.iter_mut() {
            let (moved, f) = transport(spec, &o.input)?;
            o.input = moved;
            jac = jac * f;
        }
        for x in right_inputs.iter_mut() {
            let (moved, f) = transport(spec, x)?;
            *x = moved;
            jac = jac * f;
        }
    }
    let mut out = level_sum(spec, opts, wprime, &left_outer, left_in, &right_outer, &right_inputs, &FactorVariant::Plain)?;
    if !jac.is_one() {
        out.value = out.value.scale(&jac);
        out.levels = out.levels.iter().map(|c| c * &jac).collect();
        out.terms = out.terms.scale(&jac);
    }
    Ok(out)
}

/// Which factor pairing enters a level coefficient.
#[derive(Clone, Debug)]
pub(crate) enum FactorVariant {
    Plain,
    /// The `L(−1)`-action on one factor: `⟨L(−1)ᵀw″, Y(u)F⟩ − ⟨w″, Y(L(−1)u)F⟩`.
    Translation(Side),
}

struct Factor<'a> {
    kind: &'a FormKind,
    zeta: &'a ExactScalar,
    outer: &'a [Outer],
    inputs: &'a [SlotInput],
}

impl Factor<'_> {
    fn value(&self, opts: &EvalOptions, wprime: &DualVector, u: &GradedVector, translated: bool) -> Result<Estimate> {
        if u.is_zero() {
            return Ok(Estimate::zero(opts.prec));
        }
        let mut dual = translate_dual(wprime, self.zeta);
        if translated {
            dual = crate::forms::lminus1_transpose(&dual);
        }
        if dual.is_zero() {
            return Ok(Estimate::zero(opts.prec));
        }
        let mut outer = self.outer.to_vec();
        outer.push(Outer::new(SlotInput::plain(u.clone(), -self.zeta), Side::Left));
        eval(self.kind, opts, &dual, &outer, self.inputs)
    }

    fn action(&self, opts: &EvalOptions, wprime: &DualVector, u: &GradedVector) -> Result<Estimate> {
        let a = self.value(opts, wprime, u, true)?;
        let b = self.value(opts, wprime, &virasoro_apply(-1, u), false)?;
        Ok(a.sub(&b))
    }
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn level_sum(
    spec: &ProductSpec,
    opts: &EvalOptions,
    wprime: &DualVector,
    left_outer: &[Outer],
    left_inputs: &[SlotInput],
    right_outer: &[Outer],
    right_inputs: &[SlotInput],
    variant: &FactorVariant,
) -> Result<ProductEval> {
    let prec = opts.prec;
    let f1 = Factor { kind: &spec.left, zeta: &spec.zeta1, outer: left_outer, inputs: left_inputs };
    let f2 = Factor { kind: &spec.right, zeta: &spec.zeta2, outer: right_outer, inputs: right_inputs };
    let mut levels = Vec::new();
    let mut terms = Vec::new();
    let mut total = Estimate::zero(prec);
    let mut eps_pow = ExactScalar::one();
    for l in 0..=spec.lmax {
        if l > 0 {
            eps_pow = eps_pow * &spec.epsilon;
        }
        let basis: Vec<GradedVector> = spec.pairing.basis(l).iter().cloned().map(GradedVector::basis).collect();
        let dual = spec.pairing.dual_matrix(l)?;
        let left_vals = |act: bool| -> Result<Vec<Estimate>> {
            basis.iter().map(|u| if act { f1.action(opts, wprime, u) } else { f1.value(opts, wprime, u, false) }).collect()
        };
        let right_vals = |act: bool| -> Result<Vec<Estimate>> {
            basis.iter().map(|u| if act { f2.action(opts, wprime, u) } else { f2.value(opts, wprime, u, false) }).collect()
        };
        let pairs: Vec<(Vec<Estimate>, Vec<Estimate>)> = match variant {
            FactorVariant::Plain => {
                let a = left_vals(false)?;
                if a.iter().all(|e| e.value.is_zero() && e.is_exact()) {
                    vec![]
                } else {
                    vec![(a, right_vals(false)?)]
                }
            }
            FactorVariant::Translation(Side::Left) => vec![(left_vals(true)?, right_vals(false)?)],
            FactorVariant::Translation(Side::Right) => vec![(left_vals(false)?, right_vals(true)?)],
        };
        let mut c = Estimate::zero(prec);
        for (a, b) in &pairs {
            for (beta, fa) in a.iter().enumerate() {
                if fa.value.is_zero() && fa.is_exact() {
                    continue;
                }
                let mut fb = Estimate::zero(prec);
                for (alpha, v) in b.iter().enumerate() {
                    if !dual[alpha][beta].is_zero() {
                        fb = fb.add(&v.scale(&dual[alpha][beta]));
                    }
                }
                c = c.add(&fa.mul(&fb));
            }
        }
        let term = c.scale(&eps_pow);
        total = total.add(&term);
        levels.push(c.value);
        terms.push(term.value);
    }
    let series = LevelSeries::from_levels(terms);
    let certificate = series.certify(prec).ok();
    let value = match opts.mode {
        EvalMode::Exact => Estimate { value: total.value, bound: total.bound },
        EvalMode::Series => {
            let cert = certificate.clone().ok_or_else(|| match series.certify(prec) {
                Err(e) => e,
                Ok(_) => VoxError::NonContractive("uncertified product".into()),
            })?;
            Estimate { value: total.value, bound: total.bound.add(&cert.tail) }
        }
    };
    Ok(ProductEval { value, levels, terms: series, certificate })
}

/// Native-coordinate evaluation of the product of two forms at the configuration's points.
pub(crate) fn native_eval(spec: &EpsProductSpec, wprime: &DualVector, variant: &FactorVariant, mode: EvalMode) -> Result<ProductEval> {
    spec.check_points()?;
    let kind = spec.kind_spec(RightChart::Native)?;
    let opts = EvalOptions { level: spec.lmax.max(spec.left.level).max(spec.right.level), mode, prec: Precision::from_env() };
    let left = spec.left.inputs(&spec.cfg.x_points)?;
    let right = spec.right.inputs(&spec.cfg.y_points)?;
    level_sum(&kind, &opts, wprime, &[], &left, &[], &right, variant)
}

/// The ε-product at the configuration's native points with its convergence certificate.
pub fn epsilon_product(spec: &EpsProductSpec, wprime: &DualVector) -> Result<(ExactScalar, ConvergenceReport)> {
    let prec = Precision::from_env();
    let out = native_eval(spec, wprime, &FactorVariant::Plain, EvalMode::Exact)?;
    let cert = out.terms.certify(prec)?;
    let kind = spec.kind_spec(RightChart::Native)?;
    let cauchy = cauchy_estimate(&kind, &out.levels, prec).ok();
    let report = ConvergenceReport {
        levels: out.levels.clone(),
        value: out.value.value.clone(),
        ratio: Some(cert.ratio),
        tail: Some(cert.tail),
        cauchy,
        checks: Report::new(),
    };
    Ok((out.value.value, report))
}

/// Estimate of the product value from its certified level terms.
pub fn product_estimate(spec: &EpsProductSpec, wprime: &DualVector) -> Result<Estimate> {
    let out = native_eval(spec, wprime, &FactorVariant::Plain, EvalMode::Exact)?;
    certified(&out.terms, Precision::from_env())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    fn r(p: i64, q: i64) -> ExactScalar {
        ExactScalar::ratio(p, q)
    }

    fn unit() -> BigRational {
        BigRational::one()
    }

    pub(crate) fn generator_spec(lmax: u32) -> EpsProductSpec {
        let a = GradedVector::generator();
        let cfg = SphereConfig::with_partner(unit(), unit(), r(1, 16), r(1, 4)).unwrap().with_points(vec![r(2, 1)], vec![r(3, 1)]);
        EpsProductSpec::new(
            WForm::correlator(vec![a.clone()], GradedVector::vacuum(), lmax),
            WForm::correlator(vec![a], GradedVector::vacuum(), lmax),
            cfg,
            lmax,
        )
    }

    #[test]
    fn generator_levels_closed_form() {
        // c_l = −l (−λ²)^l (AB)^{−l−1}, A = x + ζ₁, B = y + ζ₂
        let spec = generator_spec(12);
        let (value, rep) = epsilon_product(&spec, &DualVector::vacuum()).unwrap();
        let ls = spec.lambda_sq();
        let ab = r(9, 4) * r(13, 4);
        for (l, c) in rep.levels.iter().enumerate() {
            let l = l as i64;
            let expected = -(ExactScalar::from_int(l) * (-&ls).powi(l) * ab.powi(-l - 1));
            assert_eq!(*c, expected, "level {l}");
        }
        // full sum −t/(AB − t)² with t = −ελ²
        let t = -(r(1, 16) * &ls);
        let closed = -(&t * (&ab - &t).powi(-2));
        let err = crate::scalars::ApproxScalar::from_exact(&(value - closed), Precision(128)).abs();
        assert!(err.cmp_re(rep.tail.as_ref().unwrap()) != std::cmp::Ordering::Greater);
        assert!(rep.ratio.unwrap().to_f64() < 0.5);
    }

    #[test]
    fn vacuum_factors_saturate() {
        let cfg = SphereConfig::with_partner(unit(), unit(), r(1, 16), r(1, 4)).unwrap();
        let spec = EpsProductSpec::new(
            WForm::correlator(vec![], GradedVector::vacuum(), 6),
            WForm::correlator(vec![], GradedVector::vacuum(), 6),
            cfg,
            6,
        );
        let (v, rep) = epsilon_product(&spec, &DualVector::vacuum()).unwrap();
        assert_eq!(v, ExactScalar::one());
        assert!(rep.levels[1..].iter().all(ExactScalar::is_zero));
    }

    #[test]
    fn sewn_chart_matches_two_point() {
        // 1|1 split in the left coordinate reproduces 1/(x₁ − x₂)² up to the tail
        let spec = generator_spec(12);
        let form = spec.as_form(RightChart::Sewn).unwrap();
        let pts = [r(2, 1), r(1, 4)];
        let est = form.eval(&DualVector::vacuum(), &pts, EvalMode::Series).unwrap();
        let closed = (&pts[0] - &pts[1]).powi(-2);
        let err = crate::scalars::ApproxScalar::from_exact(&(&est.value - &closed), Precision(128)).abs();
        assert!(err.cmp_re(&est.bound) != std::cmp::Ordering::Greater, "{err:?} {:?}", est.bound);
        let chart = spec.kind_spec(RightChart::Sewn).unwrap();
        let y = chart.to_right(&r(1, 4)).unwrap();
        assert_eq!(chart.to_left(&y).unwrap(), r(1, 4));
    }

    #[test]
    fn invalid_configuration() {
        let mut spec = generator_spec(4);
        spec.cfg.zeta2 = r(1, 3);
        assert!(matches!(epsilon_product(&spec, &DualVector::vacuum()), Err(VoxError::InvalidConfig(_))));
    }
}
