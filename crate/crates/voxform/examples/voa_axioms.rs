//! Truncated Heisenberg vertex algebra: modes, correlators and the axiom checks.

use voxform::scalars::ExactScalar;
use voxform::voa::{check_axioms, correlator_exact, DualVector, GradedVector, VOAContext};

fn main() -> voxform::Result<()> {
    let ctx = VOAContext::build_heisenberg(6);
    println!("dim V_l for l ≤ 6: {:?}", (0..=6).map(|l| ctx.dim(l)).collect::<Vec<_>>());
    let a = GradedVector::generator();
    let two = correlator_exact(
        &DualVector::vacuum(),
        &[(a.clone(), ExactScalar::from_int(2)), (a, ExactScalar::one())],
        &GradedVector::vacuum(),
    )?;
    println!("<1', a(2) a(1) 1> = {two}");
    let rep = check_axioms(&ctx, &[ExactScalar::ratio(1, 3), ExactScalar::ratio(3, 2)]);
    for c in &rep.checks {
        println!("{:<24} {:?}", c.id, c.status);
    }
    Ok(())
}
