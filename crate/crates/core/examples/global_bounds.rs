//! Global inequalities on growing spheres, plus the view restricted to the
//! tail ‖x‖ >= 10.
use svloja::verify::{self, SamplePlan};
use svloja::PolyMatrix;

fn main() -> svloja::Result<()> {
    let schedule = verify::default_global_radii();
    let plan = SamplePlan::default().with_samples(30).with_seed(4);

    let sq = PolyMatrix::from_strings(&["x"], &[&["x^2"]])?;
    let report = verify::verify_global(&sq, &schedule, &plan)?;
    println!("{}", report.to_text());
    let tail = verify::compact_tail_view(&report, 10.0)?;
    println!("{}", tail.to_text());

    let a = PolyMatrix::from_strings(&["x1", "x2"], &[&["x1"]])?;
    let b = PolyMatrix::from_strings(&["x1", "x2"], &[&["x2"]])?;
    let sep = verify::verify_global_separation(&a, &b, &schedule, &plan)?;
    println!("{}", sep.to_text());
    Ok(())
}
