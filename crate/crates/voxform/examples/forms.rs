//! A two-point correlator form: exact value, certified level series and pole reconstruction.

use voxform::forms::{reconstruct_form, sample_configurations, EvalMode, Locus, WForm};
use voxform::scalars::ExactScalar;
use voxform::voa::{DualVector, GradedVector};

fn main() -> voxform::Result<()> {
    let a = GradedVector::generator();
    let form = WForm::correlator(vec![a.clone(), a], GradedVector::vacuum(), 12);
    let pts = [ExactScalar::from_int(2), ExactScalar::one()];
    let vac = DualVector::vacuum();
    println!("exact: {}", form.value(&vac, &pts)?);
    let est = form.eval(&vac, &pts, EvalMode::Series)?;
    println!("series: {} ± {}", est.value, est.bound.sci_string());
    let rec = reconstruct_form(&form, &vac, &sample_configurations(2, 12, 1), 3)?;
    println!("pole order at z1 = z2: {}", rec.pole_order(Locus { i: 0, j: Some(1) }));
    Ok(())
}
