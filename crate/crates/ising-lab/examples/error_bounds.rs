//! Berry-Esseen confidence for a weighted sum of Bernoulli estimates, next to
//! the Hoeffding shot count for the same accuracy.

use ising_lab::error_stats::{clt_bound, hoeffding_m, BernoulliBatch};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> ising_lab::Result<()> {
    let probs = [0.1, 0.35, 0.6];
    let weights = [0.5, -1.0, 0.8];
    let shots = 10_000;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let seqs = probs
        .iter()
        .map(|&p| (0..shots).map(|_| if rng.random::<f64>() < p { -1 } else { 1 }).collect())
        .collect();
    let batch = BernoulliBatch::new(seqs)?;
    for delta in [0.02, 0.04, 0.08] {
        let r = clt_bound(&batch, &weights, delta, 1.0)?;
        println!("Δ = {delta}: P(|Â − A| < Δ) ≥ {:.4} (valid with probability {:.4})", r.bound, r.confidence);
    }
    println!("Hoeffding shots for ε = 0.04 at 95%: {}", hoeffding_m(0.04, 0.95)?);
    Ok(())
}
