//! Overlap of two adiabatically prepared transverse-field states three ways,
//! then a ground-state fidelity sweep across the critical field.

use ising_lab::fidelity_overlap::{circuit_overlap, fidelity_sweep, overlap_instance, AdiabaticPlan, QuantumIsingParams};
use ising_lab::ising_core::Lattice;

fn main() -> ising_lab::Result<()> {
    let lattice = Lattice::chain(2, false)?;
    let a = QuantumIsingParams::new(1.0, 1.0, 0.0, lattice.clone())?;
    let b = QuantumIsingParams::new(1.2, 1.0, 0.0, lattice)?;
    let pa = AdiabaticPlan::with_time(&a, 1.2, 2, 0.1, 1.0, 1.0)?;
    let pb = AdiabaticPlan::with_time(&b, 0.9, 2, 0.1, 1.0, 1.0)?;
    let inst = overlap_instance(&a, &pa, &b, &pb)?;
    println!("statevector   {:.10}", circuit_overlap(&a, &pa, &b, &pb)?);
    println!("slab          {:.10}", inst.overlap());
    println!("mesh (fixed)  {:.10}", inst.reconstruct_overlap_fixed(&inst.mesh()?, 256)?);

    let h: Vec<f64> = (0..20).map(|i| 0.1 + 0.1 * i as f64).collect();
    println!("h_perp  |f|");
    for row in fidelity_sweep(&Lattice::chain(6, false)?, 1.0, &h, 0.2)? {
        println!("{:.2}    {:.6}", row.h_perp, row.abs);
    }
    Ok(())
}
