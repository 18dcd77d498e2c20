//! Sample the gradient inequality around a zero of F = (x^2) and fit the
//! observed exponent.
use svloja::verify::{self, SamplePlan};
use svloja::PolyMatrix;

fn main() -> svloja::Result<()> {
    let m = PolyMatrix::from_strings(&["x"], &[&["x^2"]])?;
    let plan = SamplePlan::default().with_samples(50).with_seed(7);
    let report = verify::verify_gradient_inequality(&m, &[0.0], &plan, true)?;
    println!("{}", report.to_text());
    let fit = verify::fit_empirical_exponent(&m, &[0.0], &plan)?;
    println!("fitted exponent {:.4} (r^2 {:.4}), bound {}", fit.alpha, fit.r_squared, report.exponent);
    Ok(())
}
