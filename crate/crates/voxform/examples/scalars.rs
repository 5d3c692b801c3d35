//! Exact Gaussian rationals, high-precision moduli and geometric tail bounds.

use voxform::scalars::{dyadic_decimal, geometric_tail_bound, ApproxScalar, ExactScalar, Precision};

fn main() -> voxform::Result<()> {
    let z: ExactScalar = "1/2+3/4 i".parse()?;
    let w = z.inv()?;
    println!("z = {z}, 1/z = {w}, z·(1/z) = {}", &z * &w);
    let prec = Precision::from_env();
    let m = ApproxScalar::from_exact(&z, prec).abs();
    println!("|z| ≈ {} (exactly stored as {})", m.sci_string(), m.decimal_string());
    let tail = geometric_tail_bound(&ApproxScalar::one(prec), &ApproxScalar::from_int(2, prec), 10)?;
    println!("Σ_(l>10) 2^-l ≤ {}", tail.sci_string());
    println!("3/64 = {}", dyadic_decimal(ExactScalar::ratio(3, 64).re()));
    Ok(())
}
