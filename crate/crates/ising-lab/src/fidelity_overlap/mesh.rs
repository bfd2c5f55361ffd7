use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::AdiabaticPlan;
use crate::bqp_reduction::{FixedComplex, Field};
use crate::error::{Error, Result};

/// Largest number of mesh points sampled in one reconstruction.
pub const MESH_POINT_CAP: usize = 5_000_000;

/// Lower bound used for `min g` in the full-mesh precision bound.
pub const G_MIN: f64 = -1.6;

/// Interpolation nodes `x = e^{−β}` along one coupling.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeshAxis {
    half_degree: usize,
    nodes: Vec<f64>,
    width: Option<f64>,
}

impl MeshAxis {
    /// `n = 2m` and `x_i = i/(n + 1)`, `i = 1..n+1`.
    pub fn full(half_degree: usize) -> Self {
        let n = 2 * half_degree;
        let nodes = (1..=n + 1).map(|i| i as f64 / (n + 1) as f64).collect();
        Self { half_degree, nodes, width: None }
    }

    /// `x_i = anchor + width·(i − 1)/n`, all inside `(0, ∞)`.
    pub fn windowed(half_degree: usize, anchor: f64, width: f64) -> Result<Self> {
        let n = 2 * half_degree;
        if !(anchor > 0.0 && width > 0.0 && anchor.is_finite() && width.is_finite()) {
            return Err(Error::InvalidArgument(format!("window needs anchor > 0 and width > 0, got {anchor}, {width}")));
        }
        let nodes = if n == 0 { vec![anchor] } else { (0..=n).map(|i| anchor + width * i as f64 / n as f64).collect() };
        Ok(Self { half_degree, nodes, width: Some(width) })
    }

    pub fn half_degree(&self) -> usize {
        self.half_degree
    }

    pub fn degree(&self) -> usize {
        2 * self.half_degree
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn width(&self) -> Option<f64> {
        self.width
    }

    /// Lagrange basis `ℓ_i(x)` at every node.
    fn basis(&self, x: Complex64) -> Vec<Complex64> {
        let xs = &self.nodes;
        (0..xs.len())
            .map(|i| {
                xs.iter()
                    .enumerate()
                    .filter(|&(k, _)| k != i)
                    .fold(Complex64::new(1.0, 0.0), |acc, (_, &xk)| acc * (x - xk) / (xs[i] - xk))
            })
            .collect()
    }
}

/// One axis per coupling of the slab model.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeshSpec {
    pub axes: [MeshAxis; 6],
}

impl MeshSpec {
    pub fn full(half_degrees: [usize; 6]) -> Self {
        Self { axes: half_degrees.map(MeshAxis::full) }
    }

    pub fn point_count(&self) -> usize {
        self.axes.iter().map(|a| a.nodes.len()).product()
    }
}

/// `Z(β⃗*)` from samples of `Z` at real couplings.
///
/// Samples run in parallel; their sum is taken in mesh order so the result
/// does not depend on the thread count.
///
/// With `|g_j| ≤ m_j`, `p(x⃗) = Z(−ln x⃗) Π x_j^{m_j}` is a polynomial of degree
/// `2m_j` in each `x_j`, so tensor-product interpolation is exact and
/// `Z(β⃗*) = Π e^{m_j β*_j} p(e^{−β⃗*})`. The exponents are integers, so no
/// logarithm branch enters.
pub fn mesh_reconstruct<F>(sampler: F, mesh: &MeshSpec, target: &[Complex64; 6]) -> Result<Complex64>
where
    F: Fn(&[f64; 6]) -> Result<Complex64> + Sync,
{
    let total = mesh.point_count();
    if total > MESH_POINT_CAP {
        return Err(Error::CapExceeded { what: "mesh points", size: total, cap: MESH_POINT_CAP });
    }
    let axes = &mesh.axes;
    let index = |mut flat: usize| {
        let mut idx = [0usize; 6];
        for j in (0..6).rev() {
            let len = axes[j].nodes.len();
            idx[j] = flat % len;
            flat /= len;
        }
        idx
    };
    let bases: Vec<Vec<Complex64>> = (0..6).map(|j| axes[j].basis((-target[j]).exp())).collect();
    let sum = (0..total)
        .into_par_iter()
        .map(|flat| {
            let idx = index(flat);
            let xs: [f64; 6] = std::array::from_fn(|j| axes[j].nodes[idx[j]]);
            let betas = xs.map(|x| -x.ln());
            let scale: f64 = (0..6).map(|j| xs[j].powi(axes[j].half_degree as i32)).product();
            let weight: Complex64 = (0..6).map(|j| bases[j][idx[j]]).product();
            Ok(sampler(&betas)? * scale * weight)
        })
        .collect::<Result<Vec<Complex64>>>()?
        .into_iter()
        .sum::<Complex64>();
    let lift: Complex64 = (0..6).map(|j| (target[j] * axes[j].half_degree as f64).exp()).product();
    Ok(lift * sum)
}

/// [`mesh_reconstruct`] in fixed point with `bits` fractional bits.
///
/// The interpolation weights at a complex target grow like a product of
/// per-axis Lebesgue constants, so double-precision samples lose the answer
/// already at desk scale. Here `sampler` receives the nodes exactly and must
/// return the scaled value `p(x⃗) = Z(−ln x⃗) Π x_j^{m_j}` at that precision.
pub fn mesh_reconstruct_fixed<F>(sampler: F, mesh: &MeshSpec, target: &[Complex64; 6], bits: u32) -> Result<Complex64>
where
    F: Fn(&[FixedComplex; 6]) -> Result<FixedComplex> + Sync,
{
    let total = mesh.point_count();
    if total > MESH_POINT_CAP {
        return Err(Error::CapExceeded { what: "mesh points", size: total, cap: MESH_POINT_CAP });
    }
    let axes = &mesh.axes;
    let fixed = |x: f64| FixedComplex::from_complex(Complex64::new(x, 0.0), bits);
    let nodes: Vec<Vec<FixedComplex>> = axes.iter().map(|a| a.nodes.iter().map(|&x| fixed(x)).collect()).collect();
    let bases: Vec<Vec<FixedComplex>> = (0..6)
        .map(|j| {
            let x = FixedComplex::from_complex((-target[j]).exp(), bits);
            let xs = &nodes[j];
            (0..xs.len())
                .map(|i| {
                    let (mut num, mut den) = (x.one_like(), x.one_like());
                    for (_, xk) in xs.iter().enumerate().filter(|&(k, _)| k != i) {
                        num = num * (x.clone() - xk.clone());
                        den = den * (xs[i].clone() - xk.clone());
                    }
                    num / den
                })
                .collect()
        })
        .collect();
    let sum = (0..total)
        .into_par_iter()
        .map(|mut flat| {
            let mut idx = [0usize; 6];
            for j in (0..6).rev() {
                idx[j] = flat % nodes[j].len();
                flat /= nodes[j].len();
            }
            let xs: [FixedComplex; 6] = std::array::from_fn(|j| nodes[j][idx[j]].clone());
            let mut term = sampler(&xs)?;
            for j in 0..6 {
                term = term * bases[j][idx[j]].clone();
            }
            Ok(term)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(FixedComplex::zero(bits), |a, b| a + b);
    let lift: Complex64 = (0..6).map(|j| (target[j] * axes[j].half_degree as f64).exp()).product();
    Ok(lift * sum.to_complex())
}

/// `g(β) = (1 − e^{−β}) ln(1 − e^{−β}) − βe^{−β} − 7/8`.
pub fn g_function(beta: f64) -> f64 {
    let x = (-beta).exp();
    (1.0 - x) * (1.0 - x).ln() - beta * x - 0.875
}

/// Natural log of the sample precision `δ` that keeps the reconstructed
/// overlap within the mesh error budget.
///
/// A full axis contributes `ln|Λ| + (β_j/2 + G_MIN) n_j`, a windowed one of
/// width `Δ_j` contributes `(β_j/2 − 1 + ln(Δ_j/2)) n_j`; both share
/// `ln 16 + ln T + ln T′ + ln(L(L−1)L′(L′−1))`.
pub fn precision_bound_ln(
    plan: &AdiabaticPlan,
    plan2: &AdiabaticPlan,
    sites: usize,
    mesh: &MeshSpec,
    betas: &[f64; 6],
) -> Result<f64> {
    let (l, l2) = (plan.steps as f64, plan2.steps as f64);
    if plan.steps < 2 || plan2.steps < 2 || sites == 0 {
        return Err(Error::InvalidArgument("the bound needs L, L′ ≥ 2 and a nonempty lattice".into()));
    }
    if !(plan.total_time > 0.0 && plan2.total_time > 0.0) {
        return Err(Error::InvalidArgument("the bound needs T, T′ > 0".into()));
    }
    let mut ln = 16f64.ln() + plan.total_time.ln() + plan2.total_time.ln() + (l * (l - 1.0) * l2 * (l2 - 1.0)).ln();
    for (axis, &b) in mesh.axes.iter().zip(betas) {
        let n = axis.degree() as f64;
        ln += match axis.width {
            None => (sites as f64).ln() + (b / 2.0 + G_MIN) * n,
            Some(w) => (b / 2.0 - 1.0 + (w / 2.0).ln()) * n,
        };
    }
    Ok(ln)
}

/// `exp` of [`precision_bound_ln`]; underflows to zero for large meshes.
pub fn precision_bound(
    plan: &AdiabaticPlan,
    plan2: &AdiabaticPlan,
    sites: usize,
    mesh: &MeshSpec,
    betas: &[f64; 6],
) -> Result<f64> {
    precision_bound_ln(plan, plan2, sites, mesh, betas).map(f64::exp)
}
