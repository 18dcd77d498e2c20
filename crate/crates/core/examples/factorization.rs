//! Factorization bound g <= c f^eps on the compact zero set of a circle, and
//! the error reported when the inclusion hypothesis fails.
use svloja::verify::{self, SamplePlan};
use svloja::PolyMatrix;

fn main() -> svloja::Result<()> {
    let vars = ["x1", "x2"];
    let circle = PolyMatrix::from_strings(&vars, &[&["x1^2 + x2^2 - 1"]])?;
    let upper = PolyMatrix::from_strings(&vars, &[&["x1^2 + x2^2 - 1 + x2^2"]])?;
    let lower = PolyMatrix::from_strings(&vars, &[&["x2"]])?;
    let plan = SamplePlan::default().with_samples(40).with_seed(2);

    // {x2 = 0} ∩ circle sits inside the zeros of x1^2 + 2 x2^2 - 1
    let report = verify::verify_factorization(&lower, &upper, &circle, &[0.0, 0.0], 2.0, &plan)?;
    println!("{}", report.to_text());

    let axis = PolyMatrix::from_strings(&vars, &[&["x1"]])?;
    match verify::verify_factorization(&lower, &axis, &circle, &[0.0, 0.0], 2.0, &plan) {
        Ok(r) => println!("unexpected verdict {:?}", r.verdict),
        Err(e) => println!("expected failure: {e}"),
    }
    Ok(())
}
