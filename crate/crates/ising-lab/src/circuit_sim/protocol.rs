use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::state::QuantumState;
use crate::error::{check_len, Error, Result};

/// Measurement protocol for the overlap `⟨Φ|Ψ⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Protocol {
    /// Controlled-swap test, yields `|⟨Φ|Ψ⟩|²`.
    One,
    /// Controlled evolution, yields `Re` and `Im` of `⟨Φ|Ψ⟩`.
    Two,
}

impl TryFrom<u8> for Protocol {
    type Error = Error;

    fn try_from(v: u8) -> Result<Self> {
        match v {
            1 => Ok(Protocol::One),
            2 => Ok(Protocol::Two),
            _ => Err(Error::InvalidArgument(format!("protocol must be 1 or 2, got {v}"))),
        }
    }
}

/// Final-ancilla observable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Observable {
    X,
    Y,
}

/// Per-shot outcomes of one observable, already multiplied by the
/// register parity `Π m_j`, so their mean estimates the target directly.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tally {
    pub observable: Observable,
    pub outcomes: Vec<i8>,
}

impl Tally {
    pub fn mean(&self) -> f64 {
        self.outcomes.iter().map(|&x| x as f64).sum::<f64>() / self.outcomes.len() as f64
    }

    /// Standard error of the mean from the sample variance.
    pub fn std_error(&self) -> f64 {
        let m = self.mean();
        let n = self.outcomes.len() as f64;
        ((1.0 - m * m).max(0.0) / n).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProtocolEstimate {
    pub protocol: Protocol,
    pub shots: usize,
    /// Protocol 1: `(|⟨Φ|Ψ⟩|², 0)`. Protocol 2: `⟨Φ|Ψ⟩`.
    pub value: Complex64,
    pub std_error: Complex64,
    pub tallies: Vec<Tally>,
}

/// Exact expectation `⟨σ_obs⟩·Π m_j` for the final ancilla.
pub fn target_expectation(overlap: Complex64, protocol: Protocol, obs: Observable) -> f64 {
    match (protocol, obs) {
        (Protocol::One, _) => overlap.norm_sqr(),
        (Protocol::Two, Observable::X) => overlap.re,
        (Protocol::Two, Observable::Y) => overlap.im,
    }
}

const SHOT_CHUNK: usize = 1024;
/// ChaCha words consumed per shot: one `u64` of parity bits, one `f64`.
const WORDS_PER_SHOT: u128 = 4;

/// Draws `shots` outcomes of the final ancilla.
///
/// Each shot draws the `n − 1` equiprobable register outcomes, takes their
/// product as the parity `(−1)^χ`, then draws the final ancilla from
/// `P(+1) = (1 + parity·E)/2`. The stream for shot `s` of observable `o` is
/// ChaCha keyed by `seed`, stream `o`, word offset `4s`, so results do not
/// depend on how shots are scheduled.
fn draw(expectation: f64, n: usize, shots: usize, seed: u64, stream: u64) -> Vec<i8> {
    let base = {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        r.set_stream(stream);
        r
    };
    let mask = if n <= 1 { 0 } else { u64::MAX >> (65 - n) };
    let chunks: Vec<Vec<i8>> = (0..shots.div_ceil(SHOT_CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut rng = base.clone();
            let start = c * SHOT_CHUNK;
            rng.set_word_pos(start as u128 * WORDS_PER_SHOT);
            (start..shots.min(start + SHOT_CHUNK))
                .map(|_| {
                    let parity: i8 = if (rng.next_u64() & mask).count_ones() % 2 == 0 { 1 } else { -1 };
                    let p_plus = 0.5 * (1.0 + parity as f64 * expectation);
                    let x: i8 = if rng.random::<f64>() < p_plus { 1 } else { -1 };
                    parity * x
                })
                .collect()
        })
        .collect();
    chunks.concat()
}

/// Simulates a protocol measuring `⟨phi|psi⟩` with `shots` repetitions per observable.
pub fn simulate_overlap(
    phi: &QuantumState,
    psi: &QuantumState,
    protocol: Protocol,
    shots: usize,
    seed: u64,
) -> Result<ProtocolEstimate> {
    if shots == 0 {
        return Err(Error::InvalidArgument("shots must be at least 1".into()));
    }
    let overlap = phi.inner(psi)?;
    let n = phi.qubits().max(1);
    let observables: &[Observable] = match protocol {
        Protocol::One => &[Observable::X],
        Protocol::Two => &[Observable::X, Observable::Y],
    };
    let tallies: Vec<Tally> = observables
        .iter()
        .enumerate()
        .map(|(o, &obs)| Tally {
            observable: obs,
            outcomes: draw(target_expectation(overlap, protocol, obs), n, shots, seed, o as u64),
        })
        .collect();
    let (value, std_error) = match protocol {
        Protocol::One => (
            Complex64::new(tallies[0].mean(), 0.0),
            Complex64::new(tallies[0].std_error(), 0.0),
        ),
        Protocol::Two => (
            Complex64::new(tallies[0].mean(), tallies[1].mean()),
            Complex64::new(tallies[0].std_error(), tallies[1].std_error()),
        ),
    };
    Ok(ProtocolEstimate {
        protocol,
        shots,
        value,
        std_error,
        tallies,
    })
}

/// Largest register size accepted by [`full_register_distribution`].
pub const FULL_REGISTER_CAP: usize = 4;

/// Joint distribution of the ancilla outcomes computed on the full register
/// (GHZ ancillas plus one or two system registers).
///
/// Entry `m + 2^{n−1}·x` holds the probability of register outcomes `m`
/// (bit `j` set when `m_j = −1`) together with final outcome `x` (0 for +1).
pub fn full_register_distribution(
    phi: &QuantumState,
    psi: &QuantumState,
    protocol: Protocol,
    obs: Observable,
) -> Result<Vec<f64>> {
    check_len("state qubits", phi.qubits(), psi.qubits())?;
    let n = phi.qubits();
    if n == 0 || n > FULL_REGISTER_CAP {
        return Err(Error::CapExceeded {
            what: "full-register validation",
            size: n,
            cap: FULL_REGISTER_CAP,
        });
    }
    let dim = 1usize << n;
    let ones = dim - 1;
    let ghz = std::f64::consts::FRAC_1_SQRT_2;
    // Ancilla register R is the low n bits, followed by the system registers.
    let amps: Vec<Complex64> = match protocol {
        Protocol::One => {
            let mut v = vec![Complex64::new(0.0, 0.0); dim * dim * dim];
            for a in 0..dim {
                for b in 0..dim {
                    let base = psi.amplitudes()[a] * phi.amplitudes()[b] * ghz;
                    v[a * dim + b * dim * dim] += base;
                    // Controlled swap on every pair when all controls are |−⟩.
                    v[ones + b * dim + a * dim * dim] += base;
                }
            }
            v
        }
        Protocol::Two => {
            let mut v = vec![Complex64::new(0.0, 0.0); dim * dim];
            for a in 0..dim {
                v[a * dim] += phi.amplitudes()[a] * ghz;
                v[ones + a * dim] += psi.amplitudes()[a] * ghz;
            }
            v
        }
    };
    let mut state = QuantumState::from_amplitudes(amps)?;
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let had = [
        [Complex64::new(h, 0.0), Complex64::new(h, 0.0)],
        [Complex64::new(h, 0.0), Complex64::new(-h, 0.0)],
    ];
    for j in 0..n - 1 {
        state.apply_single(j, &had)?;
    }
    let last = match obs {
        Observable::X => had,
        // Had·S† maps |±_y⟩ to the computational basis.
        Observable::Y => [
            [Complex64::new(h, 0.0), Complex64::new(0.0, -h)],
            [Complex64::new(h, 0.0), Complex64::new(0.0, h)],
        ],
    };
    state.apply_single(n - 1, &last)?;
    let mut dist = vec![0.0; dim];
    for (idx, a) in state.amplitudes().iter().enumerate() {
        dist[idx & ones] += a.norm_sqr();
    }
    Ok(dist)
}

/// The distribution the statistics-level simulation samples from, in the
/// layout of [`full_register_distribution`].
pub fn statistical_distribution(overlap: Complex64, n: usize, protocol: Protocol, obs: Observable) -> Vec<f64> {
    let e = target_expectation(overlap, protocol, obs);
    let half = 1usize << (n - 1);
    (0..2 * half)
        .map(|idx| {
            let parity = if (idx % half).count_ones().is_multiple_of(2) { 1.0 } else { -1.0 };
            let x = if idx < half { 1.0 } else { -1.0 };
            0.5 * (1.0 + parity * x * e) / half as f64
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_state(n: usize, salt: f64) -> QuantumState {
        let amps: Vec<Complex64> = (0..1usize << n)
            .map(|k| Complex64::new((1.3 * k as f64 + salt).sin(), (0.7 * k as f64 - salt).cos()))
            .collect();
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        QuantumState::from_amplitudes(amps.into_iter().map(|a| a / norm).collect()).unwrap()
    }

    #[test]
    fn full_register_matches_statistical_model() {
        for n in 1..=3 {
            let (phi, psi) = (random_state(n, 0.2), random_state(n, 1.1));
            let ov = phi.inner(&psi).unwrap();
            for (p, obs) in [
                (Protocol::One, Observable::X),
                (Protocol::Two, Observable::X),
                (Protocol::Two, Observable::Y),
            ] {
                let full = full_register_distribution(&phi, &psi, p, obs).unwrap();
                let stat = statistical_distribution(ov, n, p, obs);
                for (a, b) in full.iter().zip(&stat) {
                    assert!((a - b).abs() < 1e-12, "n={n} {p:?} {obs:?}: {full:?} vs {stat:?}");
                }
            }
        }
    }

    #[test]
    fn equal_and_orthogonal_states() {
        let plus = QuantumState::plus_x(3);
        let est = simulate_overlap(&plus, &plus, Protocol::One, 10_000, 3).unwrap();
        assert!((est.value.re - 1.0).abs() <= 3.0 / 100.0);
        let (a, b) = (QuantumState::basis(2, 0).unwrap(), QuantumState::basis(2, 3).unwrap());
        let est = simulate_overlap(&a, &b, Protocol::One, 10_000, 3).unwrap();
        assert!(est.value.re.abs() <= 3.0 / 100.0);
    }

    #[test]
    fn draws_do_not_depend_on_thread_count() {
        let (phi, psi) = (random_state(3, 0.4), random_state(3, 2.0));
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| simulate_overlap(&phi, &psi, Protocol::Two, 5000, 11).unwrap())
        };
        assert_eq!(run(1), run(4));
    }
}
