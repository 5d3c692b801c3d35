//! Coordinate changes: exponential coefficients, the operator P(f) and form invariance.

use voxform::coords::{beta_from_a, a_from_beta, check_form_invariance, check_representation, representation_family, NDimChange};
use voxform::forms::{sample_configurations, WForm};
use voxform::scalars::ExactScalar;
use voxform::voa::{GradedVector, VOAContext};

fn main() -> voxform::Result<()> {
    // ρ(z) = z + z²
    let a: Vec<ExactScalar> = [1, 1, 0, 0, 0, 0].iter().map(|&k| ExactScalar::from_int(k)).collect();
    let beta = beta_from_a(&a)?;
    println!("β = {beta:?}, back: {:?}", a_from_beta(&beta, a.len()));
    let rep = check_representation(&VOAContext::build_heisenberg(4), &representation_family(5));
    println!("P(f∘g) = P(f)P(g) on the family: {}", rep.all_pass());
    let g = GradedVector::generator();
    let form = WForm::correlator(vec![g.clone(), g], GradedVector::vacuum(), 12);
    let inv = check_form_invariance(&form, &NDimChange::Scaling(ExactScalar::from_int(3)), &sample_configurations(2, 5, 2));
    println!("scaling invariance at 5 configurations: {}", inv.all_pass());
    Ok(())
}
