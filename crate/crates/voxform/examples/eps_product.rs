//! The ε-product of two one-point generator forms: level coefficients and decay certificate.

use num_rational::BigRational;
use num_traits::One;
use voxform::forms::WForm;
use voxform::product::{epsilon_product, EpsProductSpec};
use voxform::scalars::ExactScalar;
use voxform::sewing::SphereConfig;
use voxform::voa::{DualVector, GradedVector};

fn main() -> voxform::Result<()> {
    let a = GradedVector::generator();
    let cfg = SphereConfig::with_partner(BigRational::one(), BigRational::one(), ExactScalar::ratio(1, 16), ExactScalar::ratio(1, 4))?
        .with_points(vec![ExactScalar::from_int(2)], vec![ExactScalar::from_int(3)]);
    let spec = EpsProductSpec::new(
        WForm::correlator(vec![a.clone()], GradedVector::vacuum(), 12),
        WForm::correlator(vec![a], GradedVector::vacuum(), 12),
        cfg,
        12,
    );
    let (value, report) = epsilon_product(&spec, &DualVector::vacuum())?;
    for (l, c) in report.levels.iter().enumerate().take(5) {
        println!("c_{l} = {c}");
    }
    println!("value = {value}");
    println!("ratio ≤ {}, tail ≤ {}", report.ratio.unwrap().sci_string(), report.tail.unwrap().sci_string());
    Ok(())
}
