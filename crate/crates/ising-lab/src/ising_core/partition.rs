use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;

use super::model::{spin_of, IsingModel, PinnedSet, Weight};
use super::transfer;
use crate::error::{Error, Result};

/// How to evaluate a partition function.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Gray-code sweep over all `2^n` configurations.
    Enumerate,
    /// Site-by-site transfer matrix along the long axis of a 1D/2D grid.
    Transfer,
}

/// Size limits for the exact evaluators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Caps {
    /// Maximum number of sites for [`Method::Enumerate`].
    pub enumerate: usize,
    /// Maximum short-axis width for [`Method::Transfer`].
    pub transfer_width: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Self {
            enumerate: 26,
            transfer_width: 16,
        }
    }
}

const CHUNK_BITS: usize = 12;

/// Folds `visit(acc, bits, energy)` over every configuration in Gray-code order.
///
/// Configurations are split into fixed chunks whose partial results are merged
/// by a fixed pairwise tree, so the result does not depend on the thread count.
pub(crate) fn fold_configurations<W, A, I, F, M>(model: &IsingModel<W>, init: I, visit: F, merge: M) -> A
where
    W: Weight,
    A: Send,
    I: Fn() -> A + Sync,
    F: Fn(&mut A, u64, W) + Sync,
    M: Fn(A, A) -> A,
{
    let n = model.site_count();
    let mut adj: Vec<Vec<(usize, W)>> = vec![Vec::new(); n];
    for (&(i, j), &jij) in model.lattice().edges().iter().zip(model.couplings()) {
        adj[i].push((j, jij));
        adj[j].push((i, jij));
    }
    let fields = model.fields();
    let chunk_bits = n.min(CHUNK_BITS);
    let chunks = 1u64 << (n - chunk_bits);
    let size = 1u64 << chunk_bits;
    let partials: Vec<A> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = init();
            let i0 = c << chunk_bits;
            let mut g = i0 ^ (i0 >> 1);
            let mut e = model.energy_bits(g);
            visit(&mut acc, g, e);
            for i in i0 + 1..i0 + size {
                let k = i.trailing_zeros() as usize;
                let mut local = fields[k];
                for &(j, jkj) in &adj[k] {
                    local = local + jkj * W::from(spin_of(g, j) as f64);
                }
                e = e + W::from(2.0 * spin_of(g, k) as f64) * local;
                g ^= 1 << k;
                visit(&mut acc, g, e);
            }
            acc
        })
        .collect();
    tree_reduce(partials, merge)
}

pub(crate) fn tree_reduce<A, M: Fn(A, A) -> A>(mut items: Vec<A>, merge: M) -> A {
    assert!(!items.is_empty());
    while items.len() > 1 {
        let mut next = Vec::with_capacity(items.len().div_ceil(2));
        let mut it = items.into_iter();
        while let Some(a) = it.next() {
            match it.next() {
                Some(b) => next.push(merge(a, b)),
                None => next.push(a),
            }
        }
        items = next;
    }
    items.pop().unwrap()
}

fn check_enumerable(n: usize, caps: &Caps) -> Result<()> {
    if n > caps.enumerate {
        return Err(Error::CapExceeded {
            what: "enumeration over sites",
            size: n,
            cap: caps.enumerate,
        });
    }
    Ok(())
}

/// `Z(β) = Σ_σ exp(−β H(σ))` with default [`Caps`].
pub fn partition_function<W: Weight>(model: &IsingModel<W>, beta: Complex64, method: Method) -> Result<Complex64> {
    partition_function_capped(model, beta, method, &Caps::default())
}

pub fn partition_function_capped<W: Weight>(
    model: &IsingModel<W>,
    beta: Complex64,
    method: Method,
    caps: &Caps,
) -> Result<Complex64> {
    match method {
        Method::Enumerate => {
            check_enumerable(model.site_count(), caps)?;
            Ok(fold_configurations(
                model,
                || Complex64::new(0.0, 0.0),
                |acc, _, e| *acc += (-beta * e.into()).exp(),
                |a, b| a + b,
            ))
        }
        Method::Transfer => transfer::partition_transfer(model, beta, caps.transfer_width),
    }
}

/// Degeneracies `ξ_k` with `Z(β) = Σ_k ξ_k e^{−kβ}` for integer couplings and fields.
pub fn xi_coefficients(model: &IsingModel<f64>) -> Result<BTreeMap<i64, u64>> {
    model.integer_weights()?;
    check_enumerable(model.site_count(), &Caps::default())?;
    Ok(fold_configurations(
        model,
        BTreeMap::new,
        |acc: &mut BTreeMap<i64, u64>, _, e| *acc.entry(e as i64).or_insert(0) += 1,
        |mut a, b| {
            for (k, v) in b {
                *a.entry(k).or_insert(0) += v;
            }
            a
        },
    ))
}

/// `⟨σ_site⟩` under the Boltzmann weight at inverse temperature `beta`,
/// conditioned on the pinned spins.
pub fn corner_magnetization(model: &IsingModel<f64>, beta: f64, pinned: &PinnedSet, site: usize) -> Result<f64> {
    if site >= model.site_count() {
        return Err(Error::InvalidArgument(format!("site {site} out of range")));
    }
    if pinned.contains(site) {
        return Err(Error::InvalidArgument(format!("site {site} is pinned")));
    }
    let (reduced, keep) = pinned.reduce(model)?;
    check_enumerable(reduced.site_count(), &Caps::default())?;
    let target = keep.iter().position(|&i| i == site).expect("unpinned site survives reduction");
    // Shifting by the trivial energy bound keeps every weight ≤ 1 for β ≥ 0.
    let bound: f64 = reduced.fields().iter().chain(reduced.couplings()).map(|x| x.abs()).sum();
    let shift = if beta >= 0.0 { -bound } else { bound };
    let (z, m) = fold_configurations(
        &reduced,
        || (0.0f64, 0.0f64),
        |acc, bits, e| {
            let w = (-beta * (e - shift)).exp();
            acc.0 += w;
            acc.1 += w * spin_of(bits, target) as f64;
        },
        |a, b| (a.0 + b.0, a.1 + b.1),
    );
    Ok((m / z).clamp(-1.0, 1.0))
}
