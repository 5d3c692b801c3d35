//! Two-sphere sewing data: validation, perturbations and the Möbius map.

use voxform::scalars::ExactScalar;
use voxform::sewing::{canonical_config, mobius_from_epsilon, perturbations, validate_config};

fn main() -> voxform::Result<()> {
    let cfg = canonical_config();
    println!("canonical: ε = {}, ζ₁ = {}, ζ₂ = {}, valid = {}", cfg.epsilon, cfg.zeta1, cfg.zeta2, validate_config(&cfg).is_valid());
    for (bad, expected) in perturbations() {
        println!("perturbed ({expected}): {:?}", validate_config(&bad).violations);
    }
    let gamma = mobius_from_epsilon(&cfg.epsilon, &ExactScalar::i())?;
    println!("γ(2) = {}", gamma.apply(&ExactScalar::from_int(2))?);
    Ok(())
}
