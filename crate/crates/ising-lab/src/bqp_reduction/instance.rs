use std::f64::consts::{FRAC_PI_4, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::circuit_sim::QuantumState;
use crate::error::{Error, Result};
use crate::ising_core::{IsingModel, Lattice};

/// One step `𝒯_s = CP_p^{e₀} Zrot^{e₁} (2^n Had_p)^{[s ≠ 0]}` of a
/// Hadamard-interleaved circuit, Hadamard applied first.
///
/// The gates are the phase-form members of the universal set:
/// `Zrot = exp(iπ/16 Σσ_j)`, `CP_p = exp(iπ/4 Σ_k (σ_k + σ_{k+1} + σ_k σ_{k+1}))`
/// along the open chain, and `Had_p` with matrix elements
/// `2^{−1/2} exp(iπ/4 (σ + σ′ + σσ′))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TOperator {
    pub cp: bool,
    pub zrot: bool,
    pub hadamard: bool,
}

impl TOperator {
    /// Step `s` with the Hadamard flag set by position.
    pub fn at(s: usize, cp: bool, zrot: bool) -> Self {
        Self { cp, zrot, hadamard: s != 0 }
    }
}

/// Ising instance whose imaginary-temperature sum gives the circuit amplitude:
/// `⟨+|Π𝒯_s|+⟩ = 2^{−n(M+2)} · prefactor · Σ_σ exp(−iπH(σ)/16)`.
#[derive(Debug, Clone, PartialEq)]
pub struct IsingInstance {
    /// Spin `x + 2n·t` sits at register position `x` after step `t`.
    pub model: IsingModel,
    pub n: usize,
    pub steps: usize,
    pub prefactor: Complex64,
    /// `max_σ |H(σ)| = ΣJ + Σh`, attained by the all-up configuration.
    pub mprime: u64,
}

/// Sidecar written next to an exported instance model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceSidecar {
    pub n: usize,
    pub steps: usize,
    pub prefactor_modulus: f64,
    pub prefactor_phase: f64,
    pub mprime: u64,
    pub mprime_bound: u64,
    /// `β_j = −ln(j/K)`; `null` for `j = 0`.
    pub node_betas: Vec<Option<f64>>,
}

impl IsingInstance {
    /// Node count `K = 2M′ + 1`.
    pub fn node_count(&self) -> usize {
        2 * self.mprime as usize + 1
    }

    pub fn sidecar(&self) -> InstanceSidecar {
        let k = self.node_count();
        InstanceSidecar {
            n: self.n,
            steps: self.steps,
            prefactor_modulus: self.prefactor.norm(),
            prefactor_phase: self.prefactor.arg(),
            mprime: self.mprime,
            mprime_bound: mprime_bound(self.n, self.steps),
            node_betas: (0..k).map(|j| (j > 0).then(|| -(j as f64 / k as f64).ln())).collect(),
        }
    }
}

fn check_ops(ops: &[TOperator], n: usize) -> Result<()> {
    if ops.is_empty() {
        return Err(Error::InvalidArgument("empty 𝒯 sequence".into()));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("need at least one logical qubit".into()));
    }
    if let Some(s) = ops.iter().enumerate().position(|(s, t)| t.hadamard != (s != 0)) {
        return Err(Error::InvalidArgument(format!(
            "step {s}: the Hadamard flag must be set on every step except the first"
        )));
    }
    Ok(())
}

/// Builds the instance on the `(2n) × M` layout. Vertical bonds come from the
/// Hadamards, horizontal bonds from `CP`; bonds of strength zero are left out,
/// so the lattice is a subgraph of the grid.
pub fn circuit_to_ising(ops: &[TOperator], n: usize) -> Result<IsingInstance> {
    check_ops(ops, n)?;
    let q = 2 * n;
    let steps = ops.len();
    let mut edges = Vec::new();
    let mut fields = vec![0.0; q * steps];
    for (t, op) in ops.iter().enumerate() {
        let site = |x: usize| x + q * t;
        if op.hadamard {
            for x in 0..q {
                edges.push((site(x) - q, site(x)));
                fields[site(x) - q] += 4.0;
                fields[site(x)] += 4.0;
            }
        }
        if op.zrot {
            for x in 0..q {
                fields[site(x)] += 1.0;
            }
        }
        if op.cp {
            for x in 0..q - 1 {
                edges.push((site(x), site(x + 1)));
                fields[site(x)] += 4.0;
                fields[site(x + 1)] += 4.0;
            }
        }
    }
    let couplings = vec![4.0; edges.len()];
    let mprime = (couplings.iter().sum::<f64>() + fields.iter().sum::<f64>()) as u64;
    let model = IsingModel::new(Lattice::irregular(q * steps, edges)?, couplings, fields)?;
    Ok(IsingInstance {
        model,
        n,
        steps,
        prefactor: Complex64::new(2f64.powi((n * steps) as i32), 0.0),
        mprime,
    })
}

/// `⟨+|Π𝒯_s|+⟩` by statevector simulation on `2n` qubits.
pub fn t_amplitude(ops: &[TOperator], n: usize) -> Result<Complex64> {
    check_ops(ops, n)?;
    let q = 2 * n;
    let spin = |b: usize, j: usize| if (b >> j) & 1 == 0 { 1.0 } else { -1.0 };
    let phase = |e: f64| Complex64::from_polar(1.0, e);
    // √2 · Had_p, indexed [σ′][σ] with index 0 ↔ σ = +1.
    let had = [
        [phase(3.0 * FRAC_PI_4), phase(-FRAC_PI_4)],
        [phase(-FRAC_PI_4), phase(-FRAC_PI_4)],
    ];
    let mut state = QuantumState::plus_x(q);
    for op in ops {
        if op.hadamard {
            for j in 0..q {
                state.apply_single(j, &had)?;
            }
        }
        if op.zrot {
            state.apply_diagonal(|b| phase(PI / 16.0 * (0..q).map(|j| spin(b, j)).sum::<f64>()));
        }
        if op.cp {
            state.apply_diagonal(|b| {
                let e: f64 = (0..q - 1)
                    .map(|j| {
                        let (s, t) = (spin(b, j), spin(b, j + 1));
                        s + t + s * t
                    })
                    .sum();
                phase(FRAC_PI_4 * e)
            });
        }
    }
    let plus = QuantumState::plus_x(q);
    plus.inner(&state)
}

/// `50nM − 12M − 24n`.
pub fn mprime_bound(n: usize, steps: usize) -> u64 {
    let (n, m) = (n as u64, steps as u64);
    50 * n * m - 12 * m - 24 * n
}
