//! Telescoping estimator for `Z(h)` built from corner-magnetization queries.
//!
//! The field is raised from `0` to `h` in `L` equal steps. Each ratio
//! `Z(h_k)/Z(h_{k−1})` is the mean of `e^{βδh Σσ}` under the Boltzmann
//! distribution at `h_{k−1}`, and samples from that distribution are drawn one
//! site at a time from conditional magnetizations of pinned models.

use std::collections::HashMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ising_core::{
    corner_magnetization, partition_function, Geometry, IsingModel, Lattice, Method, PinnedSet, SpinConfiguration,
};

/// Success probability targeted by the sample count.
pub const CONFIDENCE: f64 = 0.75;

/// Equally spaced fields `0 = h₀ < … < h_L = h`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldSchedule {
    pub fields: Vec<f64>,
    pub dh: f64,
    /// Realized `η = β|Λ|δh`, at most the requested value.
    pub eta: f64,
    pub steps: usize,
}

/// `L = ⌈hβ|Λ|/η⌉` and `δh = h/L`.
pub fn schedule(h: f64, beta: f64, sites: usize, eta: f64) -> Result<FieldSchedule> {
    if !(h > 0.0 && beta > 0.0 && eta > 0.0 && sites > 0) || !(h * beta).is_finite() {
        return Err(Error::InvalidArgument(format!(
            "schedule needs h, β, η > 0 and a nonempty lattice, got h = {h}, β = {beta}, η = {eta}, |Λ| = {sites}"
        )));
    }
    let steps = (h * beta * sites as f64 / eta).ceil() as usize;
    let dh = h / steps as f64;
    let fields = (0..=steps).map(|k| if k == steps { h } else { k as f64 * dh }).collect();
    Ok(FieldSchedule { fields, dh, eta: beta * sites as f64 * dh, steps })
}

/// Smallest `n` with `n ≥ −sinh²η e^{2η} L² ln[(1 − (3/4)^{1/L})/2] / (2 ln²(1+δ))`,
/// which makes every stage land within `ζ = ln(1+δ)/(L e^η)` of its mean with
/// joint probability at least 3/4.
pub fn sample_count(steps: usize, eta: f64, delta: f64) -> Result<u64> {
    if !(delta > 0.0 && delta < 1.0) || steps == 0 || !(eta > 0.0) {
        return Err(Error::InvalidArgument(format!("need δ ∈ (0,1), L ≥ 1, η > 0; got δ = {delta}, L = {steps}, η = {eta}")));
    }
    let l = steps as f64;
    let tail = (0.5 * (1.0 - CONFIDENCE.powf(1.0 / l))).ln();
    let n = -eta.sinh().powi(2) * (2.0 * eta).exp() * l * l * tail / (2.0 * (1.0 + delta).ln().powi(2));
    Ok(n.ceil().max(1.0) as u64)
}

/// Per-stage deviation `ζ = ln(1+δ)/(L e^η)` covered by [`sample_count`].
pub fn stage_tolerance(steps: usize, eta: f64, delta: f64) -> f64 {
    (1.0 + delta).ln() / (steps as f64 * eta.exp())
}

/// Largest finesse `𝔣 = (1/|Λ|) ln[1 + (2e^{−2η}/|Λ|) ln(1+ε′)]` that keeps the
/// sampling bias within `ε′`.
pub fn finesse_bound(sites: usize, eta: f64, eps_prime: f64) -> Result<f64> {
    if !(eps_prime > 0.0) || sites == 0 {
        return Err(Error::InvalidArgument(format!("need ε′ > 0 and |Λ| ≥ 1, got {eps_prime}, {sites}")));
    }
    let n = sites as f64;
    Ok((1.0 + 2.0 * (-2.0 * eta).exp() / n * (1.0 + eps_prime).ln()).ln() / n)
}

/// Source of conditional magnetizations `⟨σ_site⟩` given pinned spins.
///
/// The estimator asks each distinct pinned prefix once per stage and reuses
/// the answer, so a stochastic source acts as one fixed approximate
/// distribution `π′`, which is what the finesse analysis assumes.
pub trait MagnetizationOracle: Sync {
    fn magnetization(&self, model: &IsingModel<f64>, beta: f64, pinned: &PinnedSet, site: usize) -> Result<f64>;

    /// Declared finesse; zero for an exact source.
    fn finesse(&self) -> f64 {
        0.0
    }
}

/// Exact conditional magnetization by enumeration of the unpinned sites.
#[derive(Debug, Clone, Copy, Default)]
pub struct ExactOracle;

impl MagnetizationOracle for ExactOracle {
    fn magnetization(&self, model: &IsingModel<f64>, beta: f64, pinned: &PinnedSet, site: usize) -> Result<f64> {
        corner_magnetization(model, beta, pinned, site)
    }
}

/// Wraps an oracle and moves every conditional probability by exactly
/// `finesse · min(p↑, p↓)`, with a sign fixed by the pinned prefix and seed.
/// Both outcomes then deviate by at most `finesse` relative to their exact value.
#[derive(Debug, Clone)]
pub struct BiasedOracle<O> {
    pub inner: O,
    pub finesse: f64,
    pub seed: u64,
}

impl<O: MagnetizationOracle> MagnetizationOracle for BiasedOracle<O> {
    fn magnetization(&self, model: &IsingModel<f64>, beta: f64, pinned: &PinnedSet, site: usize) -> Result<f64> {
        let m = self.inner.magnetization(model, beta, pinned, site)?;
        let key = pinned.iter().fold(self.seed ^ site as u64, |acc, (s, v)| {
            acc.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(((s as u64) << 1) | (v > 0) as u64)
        });
        let sign = if ChaCha8Rng::seed_from_u64(key).random::<bool>() { 1.0 } else { -1.0 };
        let up = 0.5 * (1.0 + m);
        let shifted = up + sign * self.finesse * up.min(1.0 - up);
        Ok(2.0 * shifted - 1.0)
    }

    fn finesse(&self) -> f64 {
        self.finesse
    }
}

/// Site order for sequential sampling: a boustrophedon over the first two
/// axes of a grid starting at corner 0, index order otherwise.
pub fn snake_order(lattice: &Lattice) -> Vec<usize> {
    let n = lattice.vertex_count();
    match lattice.geometry() {
        Geometry::Grid { dims, .. } if dims.len() == 2 => {
            let (w, h) = (dims[0], dims[1]);
            (0..h)
                .flat_map(|y| {
                    let row: Vec<usize> = (0..w).map(|x| x + w * y).collect();
                    if y % 2 == 0 {
                        row
                    } else {
                        row.into_iter().rev().collect()
                    }
                })
                .collect()
        }
        _ => (0..n).collect(),
    }
}

/// Conditional probabilities of `σ = +1` along `order`, filled lazily.
/// Node `(d, prefix)` lives at `2^d + prefix`, bit `i` of the prefix holding
/// the spin of `order[i]` (set for `−1`).
struct PrefixTable<'a, O> {
    oracle: &'a O,
    model: &'a IsingModel<f64>,
    beta: f64,
    order: &'a [usize],
    up: HashMap<usize, f64>,
}

impl<'a, O: MagnetizationOracle> PrefixTable<'a, O> {
    fn new(oracle: &'a O, model: &'a IsingModel<f64>, beta: f64, order: &'a [usize]) -> Self {
        Self { oracle, model, beta, order, up: HashMap::new() }
    }

    fn prob_up(&mut self, depth: usize, prefix: u64) -> Result<f64> {
        let node = (1usize << depth) + prefix as usize;
        if let Some(&p) = self.up.get(&node) {
            return Ok(p);
        }
        let mut pinned = PinnedSet::new();
        for (i, &site) in self.order[..depth].iter().enumerate() {
            pinned.pin(site, if (prefix >> i) & 1 == 0 { 1 } else { -1 })?;
        }
        let m = self.oracle.magnetization(self.model, self.beta, &pinned, self.order[depth])?;
        if !(-1.0..=1.0).contains(&m) {
            return Err(Error::Oracle(format!("magnetization {m} outside [−1, 1]")));
        }
        let p = 0.5 * (1.0 + m);
        self.up.insert(node, p);
        Ok(p)
    }

    fn draw<R: Rng>(&mut self, rng: &mut R) -> Result<u64> {
        let mut prefix = 0u64;
        let mut bits = 0u64;
        for depth in 0..self.order.len() {
            if rng.random::<f64>() >= self.prob_up(depth, prefix)? {
                prefix |= 1 << depth;
                bits |= 1 << self.order[depth];
            }
        }
        Ok(bits)
    }
}

fn check_order(order: &[usize], sites: usize) -> Result<()> {
    let mut seen = vec![false; sites];
    for &s in order {
        if s >= sites || std::mem::replace(&mut seen[s], true) {
            return Err(Error::InvalidArgument(format!("site order {order:?} is not a permutation of 0..{sites}")));
        }
    }
    if order.len() != sites {
        return Err(Error::InvalidArgument(format!("site order covers {} of {sites} sites", order.len())));
    }
    if sites > 63 {
        return Err(Error::CapExceeded { what: "sequential sampling sites", size: sites, cap: 63 });
    }
    Ok(())
}

/// One configuration drawn site by site along `order` from the oracle's
/// conditional magnetizations.
pub fn sequential_sample<O: MagnetizationOracle>(
    oracle: &O,
    model: &IsingModel<f64>,
    beta: f64,
    order: &[usize],
    seed: u64,
) -> Result<SpinConfiguration> {
    check_order(order, model.site_count())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bits = PrefixTable::new(oracle, model, beta, order).draw(&mut rng)?;
    SpinConfiguration::from_bits(bits, model.site_count())
}

/// `count` independent draws sharing one prefix table.
pub fn sequential_samples<O: MagnetizationOracle>(
    oracle: &O,
    model: &IsingModel<f64>,
    beta: f64,
    order: &[usize],
    count: usize,
    seed: u64,
) -> Result<Vec<SpinConfiguration>> {
    check_order(order, model.site_count())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut table = PrefixTable::new(oracle, model, beta, order);
    (0..count).map(|_| SpinConfiguration::from_bits(table.draw(&mut rng)?, model.site_count())).collect()
}

/// Probability of every configuration (indexed by bits) under the
/// sequential sampler, by walking the full prefix tree.
pub fn sampling_distribution<O: MagnetizationOracle>(
    oracle: &O,
    model: &IsingModel<f64>,
    beta: f64,
    order: &[usize],
) -> Result<Vec<f64>> {
    let n = model.site_count();
    check_order(order, n)?;
    if n > 20 {
        return Err(Error::CapExceeded { what: "sampling distribution sites", size: n, cap: 20 });
    }
    let mut table = PrefixTable::new(oracle, model, beta, order);
    let mut probs = vec![0.0; 1 << n];
    let mut stack = vec![(0usize, 0u64, 0u64, 1.0f64)];
    while let Some((depth, prefix, bits, p)) = stack.pop() {
        if depth == n {
            probs[bits as usize] = p;
            continue;
        }
        let up = table.prob_up(depth, prefix)?;
        stack.push((depth + 1, prefix, bits, p * up));
        stack.push((depth + 1, prefix | 1 << depth, bits | 1 << order[depth], p * (1.0 - up)));
    }
    Ok(probs)
}

/// Tunables for [`estimate_partition`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EstimatorConfig {
    pub eps: f64,
    /// Statistical share `δ`; `ε/3` when unset.
    pub delta: Option<f64>,
    /// Bias share `ε′`; `ε/3` when unset.
    pub eps_prime: Option<f64>,
    /// Requested `η = β|Λ|δh`.
    pub eta: f64,
    /// Override of the per-stage sample count.
    pub samples: Option<u64>,
}

impl EstimatorConfig {
    pub fn new(eps: f64) -> Self {
        Self { eps, delta: None, eps_prime: None, eta: 1.0, samples: None }
    }
}

/// Report of one estimator run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimatorRun {
    pub schedule: Option<FieldSchedule>,
    pub stage_ratios: Vec<f64>,
    pub samples_per_stage: u64,
    pub z_h0: f64,
    pub z_hat: f64,
    pub eps: f64,
    pub delta: f64,
    pub eps_prime: f64,
    /// Finesse the oracle must meet for the `ε′` share.
    pub finesse_required: f64,
    pub oracle_finesse: f64,
    /// Per-stage deviation `ζ` covered by the sample count.
    pub stage_tolerance: f64,
}

fn with_uniform_field(model: &IsingModel<f64>, h: f64) -> Result<IsingModel<f64>> {
    IsingModel::new(model.lattice().clone(), model.couplings().to_vec(), vec![h; model.site_count()])
}

/// `Ẑ(h) = Π_k ϱ̂_k · Z(0)` for the couplings of `model` in a uniform field `h`.
///
/// `Z(0)` is exact. `h < 0` is mapped to `|h|` by a global spin flip, which
/// leaves the couplings and `Z` unchanged. Stages use independent RNG streams
/// derived from `seed` and may run concurrently.
pub fn estimate_partition<O: MagnetizationOracle>(
    oracle: &O,
    model: &IsingModel<f64>,
    beta: f64,
    h: f64,
    config: &EstimatorConfig,
    seed: u64,
) -> Result<EstimatorRun> {
    let eps = config.eps;
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidArgument(format!("ε = {eps} must lie in (0, 1)")));
    }
    let delta = config.delta.unwrap_or(eps / 3.0);
    let eps_prime = config.eps_prime.unwrap_or(eps / 3.0);
    if !(delta > 0.0 && eps_prime > 0.0) || delta + eps_prime + delta * eps_prime > eps + 1e-12 {
        return Err(Error::InvalidArgument(format!("split δ = {delta}, ε′ = {eps_prime} exceeds ε = {eps}")));
    }
    let sites = model.site_count();
    let order = snake_order(model.lattice());
    check_order(&order, sites)?;
    let z_h0 = partition_function(&with_uniform_field(model, 0.0)?, Complex64::new(beta, 0.0), Method::Enumerate)
        .or_else(|_| partition_function(&with_uniform_field(model, 0.0)?, Complex64::new(beta, 0.0), Method::Transfer))?
        .re;
    let h = h.abs();
    if h == 0.0 {
        return Ok(EstimatorRun {
            schedule: None,
            stage_ratios: Vec::new(),
            samples_per_stage: 0,
            z_h0,
            z_hat: z_h0,
            eps,
            delta,
            eps_prime,
            finesse_required: f64::INFINITY,
            oracle_finesse: oracle.finesse(),
            stage_tolerance: 0.0,
        });
    }
    let sched = schedule(h, beta, sites, config.eta)?;
    let n = match config.samples {
        Some(n) => n,
        None => sample_count(sched.steps, sched.eta, delta)?,
    };
    let ratios: Vec<f64> = (0..sched.steps)
        .into_par_iter()
        .map(|k| {
            let stage = with_uniform_field(model, sched.fields[k])?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let mut table = PrefixTable::new(oracle, &stage, beta, &order);
            let mut sum = 0.0;
            for _ in 0..n {
                let bits = table.draw(&mut rng)?;
                let magnet = sites as f64 - 2.0 * bits.count_ones() as f64;
                sum += (beta * sched.dh * magnet).exp();
            }
            Ok(sum / n as f64)
        })
        .collect::<Result<_>>()?;
    let z_hat = ratios.iter().product::<f64>() * z_h0;
    Ok(EstimatorRun {
        finesse_required: finesse_bound(sites, sched.eta, eps_prime)?,
        oracle_finesse: oracle.finesse(),
        stage_tolerance: stage_tolerance(sched.steps, sched.eta, delta),
        schedule: Some(sched),
        stage_ratios: ratios,
        samples_per_stage: n,
        z_h0,
        z_hat,
        eps,
        delta,
        eps_prime,
    })
}

/// `Z̄(h) = Π_k E_{π′_{k−1}}[e^{βδh Σσ}] · Z(0)`, the mean of the estimator
/// under the oracle's sampling distribution, by enumeration.
pub fn estimator_mean<O: MagnetizationOracle>(
    oracle: &O,
    model: &IsingModel<f64>,
    beta: f64,
    h: f64,
    eta: f64,
) -> Result<f64> {
    let sites = model.site_count();
    let order = snake_order(model.lattice());
    let z_h0 = partition_function(&with_uniform_field(model, 0.0)?, Complex64::new(beta, 0.0), Method::Enumerate)?.re;
    let h = h.abs();
    if h == 0.0 {
        return Ok(z_h0);
    }
    let sched = schedule(h, beta, sites, eta)?;
    let mut z = z_h0;
    for k in 0..sched.steps {
        let probs = sampling_distribution(oracle, &with_uniform_field(model, sched.fields[k])?, beta, &order)?;
        z *= probs
            .iter()
            .enumerate()
            .map(|(bits, p)| p * (beta * sched.dh * (sites as f64 - 2.0 * (bits as u64).count_ones() as f64)).exp())
            .sum::<f64>();
    }
    Ok(z)
}
