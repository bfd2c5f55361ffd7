//! Field-annealing estimate of Z for a 3×3 ferromagnet in a field, repeated
//! over seeds, with the hit rate against the exact value.

use ising_lab::fpras::{estimate_partition, EstimatorConfig, ExactOracle};
use ising_lab::ising_core::{partition_function, IsingModel, Lattice, Method};
use num_complex::Complex64;

fn main() -> ising_lab::Result<()> {
    let model = IsingModel::uniform(Lattice::grid(&[3, 3], &[false, false])?, 1.0, 0.0);
    let (beta, h, eps) = (0.5, 0.5, 0.1);
    let field = IsingModel::uniform(model.lattice().clone(), 1.0, h);
    let exact = partition_function(&field, Complex64::new(beta, 0.0), Method::Enumerate)?.re;
    let config = EstimatorConfig::new(eps);
    let mut hits = 0;
    for seed in 0..20 {
        let run = estimate_partition(&ExactOracle, &model, beta, h, &config, seed)?;
        let ok = (run.z_hat - exact).abs() <= eps * exact;
        hits += ok as usize;
        println!("seed {seed:>2}: Ẑ = {:.3}  ({} samples/stage){}", run.z_hat, run.samples_per_stage, if ok { "" } else { "  miss" });
    }
    println!("Z = {exact:.3}; {hits}/20 within ε");
    Ok(())
}
