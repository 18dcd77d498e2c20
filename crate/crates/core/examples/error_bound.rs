//! Check dist(x, zeros)^(2/R) <= c f(x) on a ball around the zeros of x^2 - x.
use svloja::verify::{self, SamplePlan};
use svloja::PolyMatrix;

fn main() -> svloja::Result<()> {
    let m = PolyMatrix::from_strings(&["x"], &[&["x^2 - x"]])?;
    let plan = SamplePlan::default().with_samples(200).with_seed(11);
    let d = verify::estimate_distance_to_zero_set(&m, &[0.4], &plan.distance, plan.seed)?;
    println!("distance from 0.4 to the zero set: {:.6} (witness {:?})", d.value, d.witness);
    let report = verify::verify_error_bound(&m, &[0.5], 2.5, &plan)?;
    println!("{}", report.to_text());
    Ok(())
}
