//! Correlator cochains: coboundary, δ² = 0, shuffles and the Leibniz rule for the product.

use num_rational::BigRational;
use num_traits::One;
use voxform::complex::{coboundary, delta_squared_check, leibniz_check, leibniz_configurations, shuffle_check, Cochain, ProductSetup};
use voxform::scalars::ExactScalar;
use voxform::sewing::SphereConfig;
use voxform::voa::{DualVector, GradedVector};

fn main() -> voxform::Result<()> {
    let a = GradedVector::generator;
    let vac = DualVector::vacuum();
    let c = Cochain::correlator(vec![a()], GradedVector::vacuum(), 2, 24);
    let d = coboundary(&c, vec![a(), a()])?;
    println!("bidegree {:?} -> {:?}", c.bidegree(), d.bidegree());
    let pts = [ExactScalar::ratio(17, 4), ExactScalar::from_int(3), ExactScalar::one()];
    for check in delta_squared_check(&c, &[a(), a()], &vac, &pts).checks {
        println!("{:<32} residual {} bound {}", check.id, check.residual, check.bound);
    }
    let two = Cochain::correlator(vec![a(), a()], GradedVector::vacuum(), 1, 24);
    println!("n=2 shuffle: {:?}", shuffle_check(&two, 1, &vac, &pts[..2]).checks[0].status);
    let one = BigRational::one();
    let setup = ProductSetup::new(SphereConfig::with_partner(one.clone(), one, ExactScalar::ratio(1, 16), ExactScalar::ratio(1, 4))?, 8);
    let e1 = Cochain::correlator(vec![a()], GradedVector::vacuum(), 1, 12);
    let cfgs = leibniz_configurations(1, 1, &setup.cfg.zeta1, 2, 3);
    let states = [a(), GradedVector::conformal(), a()];
    for check in leibniz_check(&e1, &e1, &setup, &vac, &states, &cfgs, false).checks {
        println!("{:<28} residual {} bound {}", check.id, check.residual, check.bound);
    }
    Ok(())
}
