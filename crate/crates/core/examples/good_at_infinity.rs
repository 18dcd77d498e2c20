//! Empirical goodness at infinity and the global Hölder-type bound that
//! depends on it.
use svloja::verify::{self, SamplePlan};
use svloja::PolyMatrix;

fn main() -> svloja::Result<()> {
    let schedule = verify::default_global_radii();
    let plan = SamplePlan::default().with_samples(30).with_seed(6);

    // x1 x2 decays along the axes, so the sphere minima go to zero
    let bad = PolyMatrix::from_strings(&["x1", "x2"], &[&["x1*x2"]])?;
    println!("{}", verify::check_good_at_infinity(&bad, &schedule, &plan)?.to_text());

    let good = PolyMatrix::from_strings(&["x"], &[&["x^2 - x"]])?;
    println!("{}", verify::check_good_at_infinity(&good, &schedule, &plan)?.to_text());
    let report = verify::verify_holder_global(&good, &schedule, &plan)?;
    println!("{}", report.to_text());
    Ok(())
}
