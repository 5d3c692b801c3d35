//! The invariant bilinear form at λ² = −ε, its dual bases and adjoint modes.

use voxform::pairing::{check_pairing, BilinearForm};
use voxform::scalars::ExactScalar;
use voxform::voa::VOAContext;

fn main() -> voxform::Result<()> {
    let eps = ExactScalar::ratio(1, 16);
    let form = BilinearForm::from_epsilon(6, &eps, &ExactScalar::i())?;
    println!("λ² = {}", form.lambda_sq());
    for l in 0..=3 {
        println!("Gram block at weight {l}: {:?}", form.gram(l)?);
    }
    let rep = check_pairing(&VOAContext::build_heisenberg(6), &form, 3, 3, 4);
    println!("{} pairing checks, all pass: {}", rep.checks.len(), rep.all_pass());
    Ok(())
}
