//! A random layered program, its amplitude from the statevector simulator,
//! the same number from the enlarged complex-coupling Ising model, and
//! sampled estimates from both measurement protocols.

use ising_lab::circuit_sim::{amplitude, enlarged_model, layered_program, simulate_protocol, Boundary, Protocol};
use ising_lab::ising_core::{Lattice, Method};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> ising_lab::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let lattice = Lattice::chain(3, false)?;
    let slices: Vec<(Vec<f64>, Vec<f64>)> = (0..3)
        .map(|_| {
            let j = (0..2).map(|_| rng.random_range(-1.0..1.0)).collect();
            let h = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
            (j, h)
        })
        .collect();
    let thetas: Vec<Vec<f64>> = (0..2).map(|_| (0..3).map(|_| rng.random_range(0.2..1.3)).collect()).collect();
    let program = layered_program(&lattice, 0.7, &slices, &thetas)?;

    let direct = amplitude(&program)?;
    let ising = enlarged_model(&program, Boundary::Open)?.amplitude(Method::Enumerate)?;
    println!("statevector  {direct:.12}");
    println!("ising        {ising:.12}");
    println!("difference   {:.3e}", (direct - ising).norm());

    for protocol in [Protocol::One, Protocol::Two] {
        let est = simulate_protocol(&program, protocol, 20_000, 5)?;
        println!("{protocol:?}: {:.4} ± {:.4}", est.value, est.std_error);
    }
    println!("|A|² = {:.4}", direct.norm_sqr());
    Ok(())
}
