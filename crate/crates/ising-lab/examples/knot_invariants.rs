//! Potts partition functions of the bundled knot diagrams at the three
//! invariant temperatures.

use ising_lab::knots::{catalog_names, invariant_beta, knot_invariant};

fn main() -> ising_lab::Result<()> {
    for q in 1..=3 {
        println!("q = {q}, β = {:.6}", invariant_beta(q));
    }
    for name in catalog_names() {
        let row: Vec<String> = (1..=3)
            .map(|q| knot_invariant(name, q).map(|z| format!("{:>8.4} ∠ {:>7.4}π", z.norm(), z.arg() / std::f64::consts::PI)))
            .collect::<Result<_, _>>()?;
        println!("{name:>6}  {}", row.join("   "));
    }
    Ok(())
}
