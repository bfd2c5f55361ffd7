use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{check_len, Error, Result};

/// Below this many amplitudes the layer kernels stay on one thread.
const PAR_THRESHOLD: usize = 1 << 14;

/// 2x2 complex matrix in the `(+, −)` basis, row-major.
pub type Gate2 = [[Complex64; 2]; 2];

/// Dense register of `n` qubits. Qubit `k` is bit `k` of the basis index and
/// bit value 0 is the `|+⟩` (σ = +1) eigenstate, as in `ising_core`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    n: usize,
    amps: Vec<Complex64>,
}

impl QuantumState {
    /// `|+_x⟩^{⊗n}`: every basis amplitude equal to `2^{−n/2}`.
    pub fn plus_x(n: usize) -> Self {
        let dim = 1usize << n;
        let a = Complex64::new((dim as f64).sqrt().recip(), 0.0);
        Self { n, amps: vec![a; dim] }
    }

    pub fn basis(n: usize, bits: usize) -> Result<Self> {
        let dim = 1usize << n;
        if bits >= dim {
            return Err(Error::InvalidArgument(format!("basis index {bits} out of range for {n} qubits")));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[bits] = Complex64::new(1.0, 0.0);
        Ok(Self { n, amps })
    }

    /// Wraps raw amplitudes; the length must be a power of two. No normalization.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        if !amps.len().is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "amplitude count {} is not a power of two",
                amps.len()
            )));
        }
        let n = amps.len().trailing_zeros() as usize;
        Ok(Self { n, amps })
    }

    pub fn qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &QuantumState) -> Result<Complex64> {
        check_len("state qubits", self.n, other.n)?;
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }

    /// Multiplies basis amplitude `b` by `phase(b)`.
    pub fn apply_diagonal(&mut self, phase: impl Fn(usize) -> Complex64 + Sync) {
        if self.amps.len() >= PAR_THRESHOLD {
            self.amps.par_iter_mut().enumerate().for_each(|(b, a)| *a *= phase(b));
        } else {
            self.amps.iter_mut().enumerate().for_each(|(b, a)| *a *= phase(b));
        }
    }

    /// Applies `g` to qubit `k`, with `g[σ'][σ] = ⟨σ'|g|σ⟩`.
    pub fn apply_single(&mut self, k: usize, g: &Gate2) -> Result<()> {
        if k >= self.n {
            return Err(Error::InvalidArgument(format!("qubit {k} out of range for {} qubits", self.n)));
        }
        let half = 1usize << k;
        let kernel = |block: &mut [Complex64]| {
            let (lo, hi) = block.split_at_mut(half);
            for (a0, a1) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a0, *a1);
                *a0 = g[0][0] * x + g[0][1] * y;
                *a1 = g[1][0] * x + g[1][1] * y;
            }
        };
        if self.amps.len() >= PAR_THRESHOLD {
            self.amps.par_chunks_mut(2 * half).for_each(kernel);
        } else {
            self.amps.chunks_mut(2 * half).for_each(kernel);
        }
        Ok(())
    }
}
