//! Hardness pipeline: compile logical gates on a mirrored register into a
//! translationally invariant global set, map Hadamard-interleaved circuits to
//! ferromagnetic Ising instances whose sum `Σ_σ exp(−iπH/16)` is the circuit
//! amplitude, and recover that amplitude from real-temperature partition
//! values by Lagrange interpolation.
//!
//! With `x = e^{−β}` and `M′ = max|H|`, `P(x) = e^{−βM′} Z(β) = Σ_σ x^{H + M′}` is
//! a polynomial of degree `2M′`, sampled at `x_j = j/K`. The amplitude sum is
//! `e^{iπM′/16} P(e^{−iπ/16})`.

mod gates;
mod instance;
mod lagrange;

pub use gates::{
    apply_global, apply_logical, apply_sequence, compile_logical, pauli_rotation, phase_distance, GlobalGate,
    LogicalGate, PauliAxis, DENSE_QUBIT_CAP,
};
pub use instance::{circuit_to_ising, mprime_bound, t_amplitude, InstanceSidecar, IsingInstance, TOperator};
pub use lagrange::{lagrange_estimate, FixedComplex, Field};

use std::collections::BTreeMap;
use std::f64::consts::{LN_2, PI};

use num_bigint::BigInt;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::ising_core::xi_coefficients;

/// Supplies `P̂(j/K) = e^{−β_j M′} Ẑ(β_j)` at `e^{−β_j} = j/K`; `j = 0` is the
/// `β → ∞` limit.
pub trait PartitionOracle: Sync {
    fn node_value(&self, instance: &IsingInstance, j: usize, k: usize, bits: u32) -> Result<FixedComplex>;
}

/// Any `Fn(j, K) -> P̂(j/K)` in double precision.
impl<F> PartitionOracle for F
where
    F: Fn(usize, usize) -> Result<Complex64> + Sync,
{
    fn node_value(&self, _: &IsingInstance, j: usize, k: usize, bits: u32) -> Result<FixedComplex> {
        Ok(FixedComplex::from_complex(self(j, k)?, bits))
    }
}

/// Exact values from the enumerated degeneracies, rounded only at the final
/// fixed-point division.
#[derive(Debug, Clone)]
pub struct ExactOracle {
    xi: BTreeMap<i64, u64>,
    mprime: u64,
}

impl ExactOracle {
    pub fn new(instance: &IsingInstance) -> Result<Self> {
        Ok(Self { xi: xi_coefficients(&instance.model)?, mprime: instance.mprime })
    }

    /// `P(j/K) = N_j / K^{2M′}` with integer `N_j`.
    fn numerator(&self, j: usize, k: usize) -> (BigInt, BigInt) {
        let deg = 2 * self.mprime;
        let (jb, kb) = (BigInt::from(j), BigInt::from(k));
        let mut num = BigInt::from(0);
        for (&e, &count) in &self.xi {
            let p = (e + self.mprime as i64) as u64;
            num += BigInt::from(count) * jb.pow(p as u32) * kb.pow((deg - p) as u32);
        }
        (num, kb.pow(deg as u32))
    }
}

impl PartitionOracle for ExactOracle {
    fn node_value(&self, instance: &IsingInstance, j: usize, k: usize, bits: u32) -> Result<FixedComplex> {
        if instance.mprime != self.mprime {
            return Err(Error::Oracle("exact oracle built for a different instance".into()));
        }
        let (num, den) = self.numerator(j, k);
        Ok(FixedComplex::from_ratio(&num, &den, bits))
    }
}

/// Exact values plus `±ε · e^{−β_j M′} δ(β_j)`, with `δ` the tolerated
/// partition-function error and seeded signs.
#[derive(Debug, Clone)]
pub struct NoisyOracle {
    exact: ExactOracle,
    eps: f64,
    seed: u64,
}

impl NoisyOracle {
    pub fn new(instance: &IsingInstance, eps: f64, seed: u64) -> Result<Self> {
        if !(eps >= 0.0 && eps.is_finite()) {
            return Err(Error::InvalidArgument(format!("noise level {eps} must be finite and non-negative")));
        }
        Ok(Self { exact: ExactOracle::new(instance)?, eps, seed })
    }
}

impl PartitionOracle for NoisyOracle {
    fn node_value(&self, instance: &IsingInstance, j: usize, k: usize, bits: u32) -> Result<FixedComplex> {
        let exact = self.exact.node_value(instance, j, k, bits)?;
        let sign = if ChaCha8Rng::seed_from_u64(self.seed ^ (j as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)).random::<bool>() {
            1.0
        } else {
            -1.0
        };
        let size = self.eps * node_tolerance_ln(instance.n, instance.steps, instance.mprime, j, k).exp();
        Ok(exact + FixedComplex::from_complex(Complex64::new(sign * size, 0.0), bits))
    }
}

/// `ln(e^{−βM′} δ(β))` at `e^{−β} = j/K`:
/// `ln sin(π/16) + 1.488 M′ + n(M+2) ln 2 + ln Γ(j+1) + ln Γ(K−j) − 2M′ ln K`.
pub fn node_tolerance_ln(n: usize, steps: usize, mprime: u64, j: usize, k: usize) -> f64 {
    let mp = mprime as f64;
    (PI / 16.0).sin().ln() + 1.488 * mp + (n * (steps + 2)) as f64 * LN_2 + ln_gamma(j as f64 + 1.0)
        + ln_gamma((k - j) as f64)
        - 2.0 * mp * (k as f64).ln()
}

/// Arithmetic used for the interpolation step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Precision {
    Double,
    /// Fixed point with `64 + K(⌈log₂K⌉ + 2)` fraction bits.
    Extended,
}

/// Fraction bits used by [`Precision::Extended`] for `k` nodes.
pub fn extended_bits(k: usize) -> u32 {
    let log = usize::BITS - k.max(1).leading_zeros();
    64 + k as u32 * (log + 2)
}

/// `e^{−iπ/16}` from nested square roots.
fn eval_point(bits: u32) -> FixedComplex {
    let one = BigInt::from(1) << bits;
    let sqrt = |v: BigInt| -> BigInt { (v << bits).sqrt() };
    let two: BigInt = &one * 2;
    let r2 = sqrt(two.clone());
    let r22 = sqrt(&two + &r2);
    let cos: BigInt = sqrt(&two + &r22) >> 1;
    let sin: BigInt = sqrt(&two - &r22) >> 1;
    FixedComplex::new(cos, -sin, bits)
}

/// `prefactor · 2^{−n(M+2)} · e^{iπM′/16} · P̂(e^{−iπ/16})` from `k` oracle values.
/// Exact whenever `k ≥ 2M′ + 1` and the oracle is exact, up to the arithmetic
/// chosen by `precision`.
pub fn reconstruct_amplitude(
    oracle: &impl PartitionOracle,
    instance: &IsingInstance,
    k: usize,
    precision: Precision,
) -> Result<Complex64> {
    if k == 0 {
        return Err(Error::InvalidArgument("need at least one node".into()));
    }
    let bits = match precision {
        Precision::Double => 64,
        Precision::Extended => extended_bits(k),
    };
    let values: Vec<FixedComplex> =
        (0..k).into_par_iter().map(|j| oracle.node_value(instance, j, k, bits)).collect::<Result<_>>()?;
    let kb = BigInt::from(k);
    let p_hat = match precision {
        Precision::Double => {
            let target = Complex64::from_polar(1.0, -PI / 16.0);
            let nodes: Vec<_> = values
                .iter()
                .enumerate()
                .map(|(j, v)| (Complex64::new(j as f64 / k as f64, 0.0), v.to_complex()))
                .collect();
            lagrange_estimate(&nodes, target)?
        }
        Precision::Extended => {
            let nodes: Vec<_> = values
                .into_iter()
                .enumerate()
                .map(|(j, v)| (FixedComplex::from_ratio(&BigInt::from(j), &kb, bits), v))
                .collect();
            lagrange_estimate(&nodes, eval_point(bits))?.to_complex()
        }
    };
    let scale = 2f64.powi(-((instance.n * (instance.steps + 2)) as i32));
    Ok(instance.prefactor * scale * Complex64::from_polar(1.0, PI * instance.mprime as f64 / 16.0) * p_hat)
}

/// Tolerated partition-function error at real inverse temperature `β`, as logs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeltaBound {
    /// `ln δ` from the Γ-function form with `M′` the worst-case bound.
    pub ln_delta: f64,
    /// `nM(49β − 190)`.
    pub ln_asymptotic: f64,
}

/// `ln δ(2n, M, β) = ln sin(π/16) + (β + 1.488)M′ + n(M+2) ln 2
/// + ln Γ(Ke^{−β} + 1) + ln Γ(K(1 − e^{−β})) − 2M′ ln K` with `K = 2M′ + 1`.
pub fn required_delta(n: usize, steps: usize, beta: f64) -> Result<DeltaBound> {
    if !(beta > 0.0 && beta.is_finite()) || n == 0 || steps == 0 {
        return Err(Error::InvalidArgument(format!("need β > 0 and n, M ≥ 1, got β = {beta}, n = {n}, M = {steps}")));
    }
    let mp = mprime_bound(n, steps) as f64;
    let k = 2.0 * mp + 1.0;
    let x = (-beta).exp();
    let ln_delta = (PI / 16.0).sin().ln() + (beta + 1.488) * mp + (n * (steps + 2)) as f64 * LN_2
        + ln_gamma(k * x + 1.0)
        + ln_gamma(k * (1.0 - x))
        - 2.0 * mp * k.ln();
    Ok(DeltaBound { ln_delta, ln_asymptotic: (n * steps) as f64 * (49.0 * beta - 190.0) })
}
