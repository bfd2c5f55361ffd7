use std::f64::consts::LN_2;

use num_complex::Complex64;
use serde::Serialize;

use super::grid::{fourier_coefficients, transform_axis, Axis, SampleGrid};
use crate::circuit_sim::{amplitude, CircuitProgram, DiagonalLayer, GLayer, Layer};
use crate::error::{Error, Result};
use crate::ising_core::{IsingModel, Lattice};

/// Three-axis reconstruction for a model on an `n × m` grid (axis 0 space,
/// axis 1 time) with integer horizontal couplings and fields and vertical
/// couplings in `{−1, +1}`.
///
/// Samples `A(α, θ⁺, θ⁻)` of a program alternating diagonal layers with G
/// layers whose angle is `θ⁺` on ferromagnetic and `θ⁻` on antiferromagnetic
/// vertical bonds. Then
/// `Z(β) = 2^n (2cosh β)^{N₂} Σ_ν c_ν e^{ν₁β} (tanh β)^{ν⁺} (−tanh β)^{ν⁻}`.
#[derive(Debug, Clone)]
pub struct DisorderedProblem {
    chain: Lattice,
    slices: Vec<(Vec<f64>, Vec<f64>)>,
    ferro: Vec<Vec<bool>>,
    n1: usize,
    n_plus: usize,
    n_minus: usize,
}

/// Degeneracy estimates `ξ̂_k` with `Z(β) = Σ_k ξ_k e^{−kβ}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct XiEstimate {
    pub k: Vec<i64>,
    pub xi: Vec<f64>,
    pub sigma: Vec<f64>,
    /// Smallest `k` whose estimate is both above its standard deviation and
    /// at least one half: an upper bound on the ground-state energy when the
    /// estimate is right.
    pub k_star: Option<i64>,
}

/// Reconstructed thermodynamics at one `β`, per spin, with linearly
/// propagated standard deviations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Thermo {
    pub beta: f64,
    pub z: Complex64,
    pub sigma_z: f64,
    /// `−ln Z / N` (the dimensionless free energy `βF` per spin).
    pub free_energy: f64,
    /// `−∂_β ln Z / N`.
    pub energy: f64,
    /// `β² ∂²_β ln Z / N`.
    pub specific_heat: f64,
    pub sigma_free_energy: f64,
    pub sigma_energy: f64,
    pub sigma_specific_heat: f64,
}

/// Linear map from samples to `ξ̂`: for each coefficient box entry, its
/// contribution to each `k` (dense over `k_min..`).
struct Series {
    k_min: i64,
    q: Vec<Vec<f64>>,
    scale: f64,
}

impl DisorderedProblem {
    pub fn from_model(model: &IsingModel) -> Result<Self> {
        let split = super::split_time_grid(model)?;
        let n1 = split.frequency_bound()?;
        let mut ferro = Vec::with_capacity(split.vertical.len());
        for step in &split.vertical {
            let mut row = Vec::with_capacity(step.len());
            for &j in step {
                row.push(match j {
                    1.0 => true,
                    -1.0 => false,
                    _ => {
                        return Err(Error::Unsupported(format!(
                            "three-axis reconstruction needs vertical couplings ±1, got {j}"
                        )))
                    }
                });
            }
            ferro.push(row);
        }
        let n_plus = ferro.iter().flatten().filter(|&&f| f).count();
        let n_minus = ferro.iter().flatten().count() - n_plus;
        Ok(Self {
            chain: split.chain,
            slices: split.slices,
            ferro,
            n1,
            n_plus,
            n_minus,
        })
    }

    pub fn spins(&self) -> usize {
        self.chain.vertex_count() * self.slices.len()
    }

    pub fn axes(&self) -> Vec<Axis> {
        vec![
            Axis::two_sided(self.n1),
            Axis::one_sided(self.n_plus),
            Axis::one_sided(self.n_minus),
        ]
    }

    /// Largest `|k|` with a possibly non-zero `ξ_k`.
    pub fn k_bound(&self) -> usize {
        self.n1 + self.n_plus + self.n_minus
    }

    pub fn program(&self, alpha: f64, theta_plus: f64, theta_minus: f64) -> Result<CircuitProgram> {
        let diag = |(j, h): &(Vec<f64>, Vec<f64>)| {
            Layer::Diagonal(DiagonalLayer {
                alpha,
                couplings: j.clone(),
                fields: h.clone(),
                offsets: Vec::new(),
            })
        };
        let mut layers = vec![diag(&self.slices[0])];
        for (slice, ferro) in self.slices[1..].iter().zip(&self.ferro) {
            let theta = ferro.iter().map(|&f| if f { theta_plus } else { theta_minus }).collect();
            layers.push(Layer::G(GLayer { theta }));
            layers.push(diag(slice));
        }
        CircuitProgram::new(self.chain.clone(), layers)
    }

    /// Exact amplitudes at every node, from the statevector simulator.
    pub fn sample(&self) -> Result<SampleGrid> {
        SampleGrid::sample(self.axes(), |x| amplitude(&self.program(x[0], x[1], x[2])?))
    }

    fn check_grid(&self, grid: &SampleGrid) -> Result<()> {
        if grid.axes() != self.axes().as_slice() {
            return Err(Error::InvalidArgument(format!(
                "grid axes {:?} do not match the problem layout {:?}",
                grid.axes(),
                self.axes()
            )));
        }
        Ok(())
    }

    fn series(&self) -> Series {
        let axes = self.axes();
        let n2 = self.n_plus + self.n_minus;
        let k_bound = self.k_bound() as i64;
        let count: usize = axes.iter().map(Axis::nodes).product();
        let mut q = Vec::with_capacity(count);
        for flat in 0..count {
            let idx = super::grid::node_indices(&axes, flat);
            let nu1 = axes[0].lowest() + idx[0] as i64;
            let (np, nm) = (idx[1], idx[2]);
            // (v+1)^{N₂−a}(v−1)^a in v = u² = e^{2β}, times u^{−N₂} and (−1)^{ν⁻}.
            let a = np + nm;
            let mut poly = vec![1.0f64];
            for step in 0..n2 {
                let lower = if step < a { -1.0 } else { 1.0 };
                let mut next = vec![0.0; poly.len() + 1];
                for (i, &p) in poly.iter().enumerate() {
                    next[i] += lower * p;
                    next[i + 1] += p;
                }
                poly = next;
            }
            let sign = if nm % 2 == 0 { 1.0 } else { -1.0 };
            let mut row = vec![0.0; 2 * k_bound as usize + 1];
            for (i, &p) in poly.iter().enumerate() {
                // u^{2i − N₂ + ν₁} = e^{−kβ}.
                let k = -(2 * i as i64 - n2 as i64 + nu1);
                row[(k + k_bound) as usize] += sign * p;
            }
            q.push(row);
        }
        Series {
            k_min: -k_bound,
            q,
            scale: (self.chain.vertex_count() as f64 * LN_2).exp(),
        }
    }

    /// Per-sample weights of the linear functional `Σ_ν a_ν c_ν` with real `a`.
    fn sample_weights(&self, a: &[f64]) -> Vec<Complex64> {
        let axes = self.axes();
        let mut cur: Vec<Complex64> = a.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        for (ax, axis) in axes.iter().enumerate() {
            let n = axis.nodes();
            let matrix: Vec<Vec<Complex64>> = (0..n)
                .map(|j| {
                    (0..n)
                        .map(|i| {
                            let nu = (axis.lowest() + i as i64) as f64;
                            Complex64::from_polar(1.0 / n as f64, -nu * axis.angle(j))
                        })
                        .collect()
                })
                .collect();
            cur = transform_axis(&axes, &cur, ax, &matrix);
        }
        cur
    }

    /// Standard deviation of `Re Σ_ν a_ν c_ν` under the grid's sample sigmas.
    fn propagate(&self, grid: &SampleGrid, a: &[f64]) -> f64 {
        let Some(sigma) = grid.sigma() else { return 0.0 };
        self.sample_weights(a)
            .iter()
            .zip(sigma)
            .map(|(w, s)| w.norm_sqr() * s * s)
            .sum::<f64>()
            .sqrt()
    }

    /// `Σ_k ξ_k e^{−kβ}`, with exact integer `ξ` from noiseless samples.
    pub fn reconstruct(&self, grid: &SampleGrid, beta: f64) -> Result<(Complex64, f64)> {
        let t = self.thermo(grid, beta)?;
        Ok((t.z, t.sigma_z))
    }

    pub fn thermo(&self, grid: &SampleGrid, beta: f64) -> Result<Thermo> {
        self.check_grid(grid)?;
        let series = self.series();
        let c = fourier_coefficients(grid);
        // Rows of d-th β-derivatives of e^{−kβ}, summed against q.
        let weights = |d: i32| -> Vec<f64> {
            series
                .q
                .iter()
                .map(|row| {
                    row.iter()
                        .enumerate()
                        .map(|(i, &q)| {
                            let k = (series.k_min + i as i64) as f64;
                            q * (-k).powi(d) * (-k * beta).exp()
                        })
                        .sum::<f64>()
                        * series.scale
                })
                .collect()
        };
        let (w0, w1, w2) = (weights(0), weights(1), weights(2));
        let dot = |w: &[f64]| -> Complex64 { w.iter().zip(c.coefficients()).map(|(a, b)| b * *a).sum() };
        let (z, z1, z2) = (dot(&w0), dot(&w1), dot(&w2));
        let nspins = self.spins() as f64;
        let (zr, d1, d2) = (z.re, z1.re / z.re, z2.re / z.re);
        let combine = |a: f64, b: f64, cc: f64| -> Vec<f64> {
            w0.iter()
                .zip(&w1)
                .zip(&w2)
                .map(|((x, y), w)| a * x + b * y + cc * w)
                .collect()
        };
        // δ ln Z = δZ/Z; δ(Z'/Z) = δZ'/Z − Z'δZ/Z²; δ(Z''/Z) likewise.
        let s_f = self.propagate(grid, &combine(1.0 / zr, 0.0, 0.0));
        let s_e = self.propagate(grid, &combine(-d1 / zr, 1.0 / zr, 0.0));
        let s_c = self.propagate(
            grid,
            &combine((-d2 + 2.0 * d1 * d1) / zr, -2.0 * d1 / zr, 1.0 / zr),
        );
        Ok(Thermo {
            beta,
            z,
            sigma_z: self.propagate(grid, &w0),
            free_energy: -zr.ln() / nspins,
            energy: -d1 / nspins,
            specific_heat: beta * beta * (d2 - d1 * d1) / nspins,
            sigma_free_energy: s_f / nspins,
            sigma_energy: s_e / nspins,
            sigma_specific_heat: beta * beta * s_c / nspins,
        })
    }

    /// `ξ̂_k` with standard deviations for i.i.d. sample noise `sigma` on the
    /// real and imaginary parts.
    pub fn xi_with_errors(&self, grid: &SampleGrid, sigma: f64) -> Result<XiEstimate> {
        self.check_grid(grid)?;
        let series = self.series();
        let c = fourier_coefficients(grid);
        let width = 2 * self.k_bound() + 1;
        let count = series.q.len() as f64;
        let mut xi = vec![0.0; width];
        let mut var = vec![0.0; width];
        for (row, cv) in series.q.iter().zip(c.coefficients()) {
            for (i, &q) in row.iter().enumerate() {
                xi[i] += series.scale * q * cv.re;
                var[i] += (series.scale * q).powi(2);
            }
        }
        // Each c_ν carries independent noise with variance σ²/#samples per component.
        let sigma_k: Vec<f64> = var.iter().map(|v| sigma * (v / count).sqrt()).collect();
        let k: Vec<i64> = (0..width as i64).map(|i| series.k_min + i).collect();
        let k_star = k
            .iter()
            .zip(xi.iter().zip(&sigma_k))
            .find(|(_, (&x, &s))| x > s && x >= 0.5)
            .map(|(&k, _)| k);
        Ok(XiEstimate {
            k,
            xi,
            sigma: sigma_k,
            k_star,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ising_core::{partition_function, xi_coefficients, Method};

    fn pm_model() -> IsingModel {
        let l = Lattice::grid(&[3, 3], &[false, false]).unwrap();
        let j: Vec<f64> = (0..l.edge_count()).map(|k| if (k * 7 + 3) % 5 < 2 { -1.0 } else { 1.0 }).collect();
        IsingModel::new(l, j, vec![1.0; 9]).unwrap()
    }

    #[test]
    fn two_spin_degeneracies() {
        let m = IsingModel::uniform(Lattice::grid(&[1, 2], &[false, false]).unwrap(), 1.0, 0.0);
        let p = DisorderedProblem::from_model(&m).unwrap();
        let est = p.xi_with_errors(&p.sample().unwrap(), 0.0).unwrap();
        let at = |k: i64| est.xi[est.k.iter().position(|&x| x == k).unwrap()];
        assert!((at(-1) - 2.0).abs() < 1e-12 && (at(1) - 2.0).abs() < 1e-12);
        assert_eq!(est.k_star, Some(-1));
    }

    #[test]
    fn exact_samples_reproduce_brute_force() {
        let m = pm_model();
        let p = DisorderedProblem::from_model(&m).unwrap();
        let grid = p.sample().unwrap();
        let (z0, _) = p.reconstruct(&grid, 0.0).unwrap();
        assert!((z0.re - 512.0).abs() < 1e-8);
        let (z, _) = p.reconstruct(&grid, 0.3).unwrap();
        let exact = partition_function(&m, Complex64::new(0.3, 0.0), Method::Enumerate).unwrap();
        assert!((z - exact).norm() < 1e-6 * exact.norm(), "{z} {exact}");
        let est = p.xi_with_errors(&grid, 0.0).unwrap();
        let truth = xi_coefficients(&m).unwrap();
        for (k, x) in est.k.iter().zip(&est.xi) {
            assert_eq!(x.round() as u64, truth.get(k).copied().unwrap_or(0), "k = {k}");
        }
    }
}
