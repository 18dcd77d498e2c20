//! Evaluate f and its slope for diag(x1, x2), including the kink on the diagonal.
use svloja::{AuxiliarySetup, PolyMatrix, SlopeOptions};

fn main() -> svloja::Result<()> {
    let m = PolyMatrix::from_strings(&["x1", "x2"], &[&["x1", "0"], &["0", "x2"]])?;
    let setup = AuxiliarySetup::at_zero(&m);
    let opts = SlopeOptions::default().with_seed(1);
    for x in [[2.0, -1.0], [1.0, 1.0], [0.5, 0.0], [0.0, 0.0]] {
        let f = svloja::subdiff::smallest_singular_value(&m, &x)?;
        let s = setup.slope_f(&x, &opts)?;
        println!(
            "x = {x:?}  f = {f:.6}  slope = {:.6}  multiplicity = {}  exact = {}",
            s.value, s.multiplicity, s.exact
        );
    }
    Ok(())
}
