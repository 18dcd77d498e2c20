//! Print the exponent bounds for a few matrix shapes.
use svloja::ExponentTable;

fn main() -> svloja::Result<()> {
    for (n, p, q, d) in [(1, 1, 1, 1), (1, 1, 1, 2), (2, 2, 2, 1), (2, 2, 3, 2)] {
        let table = ExponentTable::compute(n, p, Some(q), d)?;
        println!("n={n} p={p} q={q} d={d}");
        println!("{}", table.to_text());
    }
    Ok(())
}
