//! Separation of the zero sets of x1 and x1^2 + x2^2 near the origin.
use svloja::verify::{self, SamplePlan};
use svloja::PolyMatrix;

fn main() -> svloja::Result<()> {
    let f = PolyMatrix::from_strings(&["x1", "x2"], &[&["x1^2 + x2^2"]])?;
    let g = PolyMatrix::from_strings(&["x1", "x2"], &[&["x1"]])?;
    let plan = SamplePlan::default().with_samples(40).with_seed(5);
    let report = verify::verify_separation(&f, &g, &[0.0, 0.0], 1.0, &plan)?;
    println!("{}", report.to_text());
    Ok(())
}
