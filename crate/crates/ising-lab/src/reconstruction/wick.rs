use std::f64::consts::{FRAC_PI_4, LN_2};

use num_complex::Complex64;
use serde::Serialize;

use crate::circuit_sim::{amplitude, layered_program, rotation_exponents};
use crate::error::{Error, Result};
use crate::ising_core::{IsingModel, Lattice};

use super::grid::{continue_to, Axis, SampleGrid};

/// Complex angles at which the layered amplitude equals a real-temperature
/// partition function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WickTarget {
    pub alpha: Complex64,
    pub theta: Complex64,
    /// Per-site, per-step log prefactor `B(θ*)`.
    pub g: Complex64,
}

/// `α* = −iβ`, so `e^{iα(ΣJσσ + Σhσ)} = e^{−βH}`.
pub fn wick_alpha(beta: f64) -> Complex64 {
    Complex64::new(0.0, -beta)
}

/// `g(θ) = ½ ln sin 2θ + iπ/4 − ½ ln 2` on the principal branch. It can
/// differ from the gate's own prefactor by `iπ`; [`wick_targets`] returns the
/// branch that reproduces the gate.
pub fn wick_g(theta: Complex64) -> Complex64 {
    0.5 * (2.0 * theta).sin().ln() + Complex64::new(-0.5 * LN_2, FRAC_PI_4)
}

/// Targets for inverse temperature `beta` and vertical coupling `j_down`:
/// `tan θ* = −i e^{−2βJ↓}` makes the rotation coupling equal to `βJ↓`.
pub fn wick_targets(beta: f64, j_down: f64) -> Result<WickTarget> {
    let x = 2.0 * beta * j_down;
    if x == 0.0 {
        return Err(Error::Singular("e^{2βJ↓} = 1 puts θ* on the branch point of arctan".into()));
    }
    let theta = Complex64::new(0.0, -(-x).exp()).atan();
    let (_, b) = rotation_exponents(theta)?;
    Ok(WickTarget {
        alpha: wick_alpha(beta),
        theta,
        g: b,
    })
}

/// Layout for a model on an `n × m` grid (axis 0 is space, axis 1 is time)
/// whose vertical couplings all equal one real `j_vertical`, with integer
/// horizontal couplings and fields. Sampled over `(α, θ)`.
#[derive(Debug, Clone)]
pub struct UniformProblem {
    pub(crate) lattice: Lattice,
    pub(crate) slices: Vec<(Vec<f64>, Vec<f64>)>,
    pub(crate) j_vertical: f64,
    n1: usize,
}

impl UniformProblem {
    pub fn from_model(model: &IsingModel) -> Result<Self> {
        let split = super::split_time_grid(model)?;
        let jv = split.vertical.iter().flatten().copied().collect::<Vec<_>>();
        let j_vertical = jv.first().copied().unwrap_or(0.0);
        if jv.iter().any(|&j| j != j_vertical) || j_vertical == 0.0 {
            return Err(Error::Unsupported(
                "two-axis reconstruction needs one non-zero vertical coupling".into(),
            ));
        }
        let n1 = split.frequency_bound()?;
        Ok(Self {
            lattice: split.chain,
            slices: split.slices,
            j_vertical,
            n1,
        })
    }

    pub fn axes(&self) -> Vec<Axis> {
        let n2 = self.lattice.vertex_count() * (self.slices.len() - 1);
        vec![Axis::two_sided(self.n1), Axis::two_sided(n2)]
    }

    /// `A(α, θ)` for the layered program, via the statevector simulator.
    pub fn amplitude_at(&self, alpha: Complex64, theta: Complex64) -> Result<Complex64> {
        let c = |v: &Vec<f64>| v.iter().map(|&x| Complex64::new(x, 0.0)).collect::<Vec<_>>();
        let slices: Vec<_> = self.slices.iter().map(|(j, h)| (c(j), c(h))).collect();
        let n = self.lattice.vertex_count();
        let thetas = vec![vec![theta; n]; self.slices.len() - 1];
        amplitude(&layered_program(&self.lattice, alpha, &slices, &thetas)?)
    }

    pub fn sample(&self) -> Result<SampleGrid> {
        SampleGrid::sample(self.axes(), |x| {
            self.amplitude_at(Complex64::new(x[0], 0.0), Complex64::new(x[1], 0.0))
        })
    }

    /// `Z(β) = 2^n e^{−n(m−1)g(θ*)} A(α*, θ*)` with `A` continued from the grid.
    ///
    /// `θ*` hits the branch point at `β = 0`, where `Z = 2^{nm}` exactly.
    pub fn reconstruct(&self, grid: &SampleGrid, beta: f64) -> Result<Complex64> {
        let n = self.lattice.vertex_count() as f64;
        let steps = (self.slices.len() - 1) as f64;
        if beta == 0.0 {
            return Ok(Complex64::new((n * (steps + 1.0) * LN_2).exp(), 0.0));
        }
        let w = wick_targets(beta, self.j_vertical)?;
        let a = continue_to(grid, &[w.alpha, w.theta])?;
        Ok(a * (n * LN_2 - n * steps * w.g).exp())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g_matches_rotation_prefactor() {
        for (beta, j) in [(0.4, 1.0), (1.3, -0.7), (0.05, 2.0)] {
            let w = wick_targets(beta, j).unwrap();
            assert!(((2.0 * (w.g - wick_g(w.theta))).exp() - 1.0).norm() < 1e-12);
            let (jd, _) = rotation_exponents(w.theta).unwrap();
            assert!((jd - Complex64::new(beta * j, 0.0)).norm() < 1e-12);
        }
        assert_eq!(wick_alpha(0.0), Complex64::new(0.0, 0.0));
        assert!(wick_targets(0.0, 1.0).is_err());
    }

    #[test]
    fn two_axis_reconstruction_matches_brute_force() {
        use crate::ising_core::{partition_function, Method};
        let l = Lattice::grid(&[2, 3], &[false, false]).unwrap();
        let m = IsingModel::uniform(l, 1.0, 1.0);
        let p = UniformProblem::from_model(&m).unwrap();
        let grid = p.sample().unwrap();
        for beta in [0.2, 0.7, 1.5] {
            let z = p.reconstruct(&grid, beta).unwrap();
            let exact = partition_function(&m, Complex64::new(beta, 0.0), Method::Enumerate).unwrap();
            assert!((z - exact).norm() < 1e-8 * exact.norm(), "{beta}: {z} vs {exact}");
        }
    }
}
