use std::f64::consts::TAU;
use std::path::Path;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};

/// Node layout along one angle axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisKind {
    /// Frequencies `−N..=N`, nodes `2πj/(2N+1)`.
    TwoSided,
    /// Frequencies `0..=N`, nodes `2πj/(N+1)`.
    OneSided,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Axis {
    pub bound: usize,
    pub kind: AxisKind,
}

impl Axis {
    pub fn two_sided(bound: usize) -> Self {
        Self {
            bound,
            kind: AxisKind::TwoSided,
        }
    }

    pub fn one_sided(bound: usize) -> Self {
        Self {
            bound,
            kind: AxisKind::OneSided,
        }
    }

    pub fn nodes(&self) -> usize {
        match self.kind {
            AxisKind::TwoSided => 2 * self.bound + 1,
            AxisKind::OneSided => self.bound + 1,
        }
    }

    pub fn angle(&self, j: usize) -> f64 {
        TAU * j as f64 / self.nodes() as f64
    }

    /// Lowest frequency; frequencies run over `lowest..lowest + nodes`.
    pub fn lowest(&self) -> i64 {
        match self.kind {
            AxisKind::TwoSided => -(self.bound as i64),
            AxisKind::OneSided => 0,
        }
    }

    /// Interpolation kernel: `F(x) = Σ_j F(x_j)·kernel(x − x_j)` for every
    /// trigonometric polynomial with frequencies on this axis.
    pub fn kernel(&self, x: Complex64) -> Complex64 {
        match self.kind {
            AxisKind::TwoSided => kernel_w(self.bound, x),
            AxisKind::OneSided => {
                let q = (Complex64::i() * x).exp();
                let mut acc = Complex64::new(0.0, 0.0);
                let mut p = Complex64::new(1.0, 0.0);
                for _ in 0..=self.bound {
                    acc += p;
                    p *= q;
                }
                acc / self.nodes() as f64
            }
        }
    }
}

/// `sin((2N+1)x/2) / ((2N+1) sin(x/2))`, equal to `1` at `x ≡ 0 (mod 2π)`.
pub fn kernel_w(n: usize, x: Complex64) -> Complex64 {
    let m = (2 * n + 1) as f64;
    let den = (x * 0.5).sin();
    if den.norm() < 1e-6 {
        // Near the removable singularity the closed form cancels badly.
        let mut acc = Complex64::new(0.0, 0.0);
        for nu in -(n as i64)..=n as i64 {
            acc += (Complex64::i() * x * nu as f64).exp();
        }
        return acc / m;
    }
    (x * (m * 0.5)).sin() / (den * m)
}

/// Samples of `F` on a tensor grid of angle nodes, last axis fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleGrid {
    axes: Vec<Axis>,
    values: Vec<Complex64>,
    #[serde(default)]
    sigma: Option<Vec<f64>>,
}

impl SampleGrid {
    pub fn new(axes: Vec<Axis>, values: Vec<Complex64>, sigma: Option<Vec<f64>>) -> Result<Self> {
        let count = axes.iter().map(Axis::nodes).product();
        check_len("grid samples", count, values.len())?;
        if let Some(s) = &sigma {
            check_len("grid sigmas", count, s.len())?;
            if s.iter().any(|&x| !(x >= 0.0)) {
                return Err(Error::InvalidArgument("sample sigmas must be non-negative".into()));
            }
        }
        Ok(Self { axes, values, sigma })
    }

    /// Evaluates `f` at every node, in parallel.
    pub fn sample(axes: Vec<Axis>, f: impl Fn(&[f64]) -> Result<Complex64> + Sync) -> Result<Self> {
        let count: usize = axes.iter().map(Axis::nodes).product();
        let values = (0..count)
            .into_par_iter()
            .map(|flat| f(&node_angles(&axes, flat)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(axes, values, None)
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn sigma(&self) -> Option<&[f64]> {
        self.sigma.as_deref()
    }

    pub fn with_sigma(mut self, sigma: f64) -> Self {
        self.sigma = Some(vec![sigma; self.values.len()]);
        self
    }

    pub fn node_indices(&self, flat: usize) -> Vec<usize> {
        node_indices(&self.axes, flat)
    }

    pub fn node_angles(&self, flat: usize) -> Vec<f64> {
        node_angles(&self.axes, flat)
    }

    /// Copy with independent Gaussian noise of standard deviation `sigma` on
    /// the real and imaginary part of every sample.
    pub fn with_noise(&self, sigma: f64, seed: u64) -> Result<Self> {
        let normal = Normal::new(0.0, sigma).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values = self
            .values
            .iter()
            .map(|v| v + Complex64::new(normal.sample(&mut rng), normal.sample(&mut rng)))
            .collect();
        Ok(Self {
            axes: self.axes.clone(),
            values,
            sigma: Some(vec![sigma; self.values.len()]),
        })
    }

    /// CSV with one row per node: node indices, `re`, `im`, `sigma`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        let mut header: Vec<String> = (0..self.axes.len()).map(|a| format!("j{a}")).collect();
        header.extend(["re", "im", "sigma"].map(String::from));
        w.write_record(&header)?;
        for (flat, v) in self.values.iter().enumerate() {
            let mut row: Vec<String> = self.node_indices(flat).iter().map(|j| j.to_string()).collect();
            row.push(format!("{:e}", v.re));
            row.push(format!("{:e}", v.im));
            row.push(format!("{:e}", self.sigma.as_ref().map_or(0.0, |s| s[flat])));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

pub(crate) fn node_indices(axes: &[Axis], mut flat: usize) -> Vec<usize> {
    let mut idx = vec![0; axes.len()];
    for (a, axis) in axes.iter().enumerate().rev() {
        idx[a] = flat % axis.nodes();
        flat /= axis.nodes();
    }
    idx
}

fn node_angles(axes: &[Axis], flat: usize) -> Vec<f64> {
    node_indices(axes, flat)
        .iter()
        .zip(axes)
        .map(|(&j, a)| a.angle(j))
        .collect()
}

/// Contracts `tensor` (shape from `axes`) with one vector per axis:
/// `Σ_j T_j Π_a v_a[j_a]`.
pub(crate) fn contract(axes: &[Axis], tensor: &[Complex64], vectors: &[Vec<Complex64>]) -> Complex64 {
    let mut cur = tensor.to_vec();
    for (a, axis) in axes.iter().enumerate().rev() {
        let n = axis.nodes();
        cur = cur
            .chunks(n)
            .map(|row| row.iter().zip(&vectors[a]).map(|(x, y)| x * y).sum())
            .collect();
    }
    cur[0]
}

/// Applies a square matrix along one axis of a tensor.
pub(crate) fn transform_axis(axes: &[Axis], tensor: &[Complex64], axis: usize, matrix: &[Vec<Complex64>]) -> Vec<Complex64> {
    let n = axes[axis].nodes();
    let inner: usize = axes[axis + 1..].iter().map(Axis::nodes).product();
    let mut out = vec![Complex64::new(0.0, 0.0); tensor.len()];
    for (block_in, block_out) in tensor.chunks(n * inner).zip(out.chunks_mut(n * inner)) {
        for (r, row) in matrix.iter().enumerate() {
            for (c, m) in row.iter().enumerate() {
                for k in 0..inner {
                    block_out[r * inner + k] += m * block_in[c * inner + k];
                }
            }
        }
    }
    out
}

/// Fourier coefficients `c_ν` of a sampled trigonometric polynomial, on the
/// same tensor shape as the grid (frequency `lowest + i` at index `i`).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefficientBox {
    axes: Vec<Axis>,
    coeffs: Vec<Complex64>,
}

impl CoefficientBox {
    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Frequencies of the coefficient at flat index `flat`.
    pub fn frequencies(&self, flat: usize) -> Vec<i64> {
        node_indices(&self.axes, flat)
            .iter()
            .zip(&self.axes)
            .map(|(&i, a)| a.lowest() + i as i64)
            .collect()
    }

    pub fn get(&self, nu: &[i64]) -> Option<Complex64> {
        if nu.len() != self.axes.len() {
            return None;
        }
        let mut flat = 0;
        for (&f, a) in nu.iter().zip(&self.axes) {
            let i = f - a.lowest();
            if i < 0 || i >= a.nodes() as i64 {
                return None;
            }
            flat = flat * a.nodes() + i as usize;
        }
        Some(self.coeffs[flat])
    }

    /// `Σ_ν c_ν e^{i ν·x}`.
    pub fn synthesize(&self, x: &[Complex64]) -> Complex64 {
        let vectors: Vec<Vec<Complex64>> = self
            .axes
            .iter()
            .zip(x)
            .map(|(a, &xa)| {
                (0..a.nodes())
                    .map(|i| (Complex64::i() * xa * (a.lowest() + i as i64) as f64).exp())
                    .collect()
            })
            .collect();
        contract(&self.axes, &self.coeffs, &vectors)
    }
}

/// `c_ν = (1/#nodes) Σ_j F(x_j) e^{−iν·x_j}`, separably along each axis.
pub fn fourier_coefficients(grid: &SampleGrid) -> CoefficientBox {
    let mut cur = grid.values.clone();
    for (a, axis) in grid.axes.iter().enumerate() {
        let n = axis.nodes();
        let matrix: Vec<Vec<Complex64>> = (0..n)
            .map(|i| {
                let nu = (axis.lowest() + i as i64) as f64;
                (0..n)
                    .map(|j| Complex64::from_polar(1.0 / n as f64, -nu * axis.angle(j)))
                    .collect()
            })
            .collect();
        cur = transform_axis(&grid.axes, &cur, a, &matrix);
    }
    CoefficientBox {
        axes: grid.axes.clone(),
        coeffs: cur,
    }
}

/// `Σ_j F(x_j) Π_a kernel_a(target_a − x_{a,j_a})`.
pub fn continue_to(grid: &SampleGrid, target: &[Complex64]) -> Result<Complex64> {
    check_len("continuation target axes", grid.axes.len(), target.len())?;
    Ok(contract(&grid.axes, &grid.values, &kernel_vectors(&grid.axes, target)))
}

pub(crate) fn kernel_vectors(axes: &[Axis], target: &[Complex64]) -> Vec<Vec<Complex64>> {
    axes.iter()
        .zip(target)
        .map(|(a, &t)| (0..a.nodes()).map(|j| a.kernel(t - a.angle(j))).collect())
        .collect()
}

/// A priori bound `Σ_j |w^{(N)}(−iβ − α_j)|·δφ*` for a one-axis two-sided
/// grid, with `δφ* = max_j σ_j`.
pub fn apriori_error(grid: &SampleGrid, beta: f64) -> Result<f64> {
    let [axis] = grid.axes.as_slice() else {
        return Err(Error::InvalidArgument("a priori bound needs a one-axis grid".into()));
    };
    if axis.kind != AxisKind::TwoSided {
        return Err(Error::InvalidArgument("a priori bound needs a two-sided axis".into()));
    }
    let sigma = grid
        .sigma
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("a priori bound needs per-sample sigmas".into()))?;
    let delta = sigma.iter().cloned().fold(0.0, f64::max);
    let target = Complex64::new(0.0, -beta);
    Ok((0..axis.nodes())
        .map(|j| axis.kernel(target - axis.angle(j)).norm())
        .sum::<f64>()
        * delta)
}
