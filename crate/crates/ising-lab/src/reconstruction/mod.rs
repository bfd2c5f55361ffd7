//! Analytic continuation from complex to real temperature: trigonometric
//! interpolation on uniform angle grids, Wick-rotation targets, a priori
//! error propagation, and the three-axis reconstruction for disordered
//! models with its degeneracy estimates.

mod disordered;
mod grid;
mod wick;

pub use disordered::{DisorderedProblem, Thermo, XiEstimate};
pub use grid::{apriori_error, continue_to, fourier_coefficients, kernel_w, Axis, AxisKind, CoefficientBox, SampleGrid};
pub use wick::{wick_alpha, wick_g, wick_targets, UniformProblem, WickTarget};

use crate::error::{Error, Result};
use crate::ising_core::{Geometry, IsingModel, Lattice};

/// A 2D grid model cut into time slices along axis 1.
struct TimeSplit {
    chain: Lattice,
    /// Per slice: couplings in `chain` edge order, then fields.
    slices: Vec<(Vec<f64>, Vec<f64>)>,
    /// Per step `t → t+1`: vertical coupling at each site.
    vertical: Vec<Vec<f64>>,
}

impl TimeSplit {
    /// `N₁ = Σ_t (Σ|J| + Σ|h|)`, the largest α frequency. Needs integer weights.
    fn frequency_bound(&self) -> Result<usize> {
        let mut total = 0.0;
        for (j, h) in &self.slices {
            for &x in j.iter().chain(h) {
                if x.fract() != 0.0 {
                    return Err(Error::InvalidArgument(format!(
                        "horizontal couplings and fields must be integers, got {x}"
                    )));
                }
                total += x.abs();
            }
        }
        Ok(total as usize)
    }
}

fn split_time_grid(model: &IsingModel) -> Result<TimeSplit> {
    let Geometry::Grid { dims, periodic } = model.lattice().geometry() else {
        return Err(Error::Unsupported("reconstruction needs a grid lattice".into()));
    };
    let (n, m) = match dims.as_slice() {
        [n] => (*n, 1),
        [n, m] => (*n, *m),
        _ => return Err(Error::Unsupported("reconstruction needs a 1D or 2D grid".into())),
    };
    if periodic.get(1).copied().unwrap_or(false) && m > 2 {
        return Err(Error::Unsupported("periodic time axis is not supported".into()));
    }
    let chain = Lattice::chain(n, periodic[0])?;
    let chain_index = chain.edge_index();
    let mut slices = vec![(vec![0.0; chain.edge_count()], vec![0.0; n]); m];
    let mut vertical = vec![vec![0.0; n]; m.saturating_sub(1)];
    for (t, slice) in slices.iter_mut().enumerate() {
        for x in 0..n {
            slice.1[x] = model.fields()[x + n * t];
        }
    }
    for (&(u, v), &j) in model.lattice().edges().iter().zip(model.couplings()) {
        let (xu, tu, xv, tv) = (u % n, u / n, v % n, v / n);
        if tu == tv {
            let k = chain_index[&(xu.min(xv), xu.max(xv))];
            slices[tu].0[k] = j;
        } else {
            vertical[tu.min(tv)][xu] = j;
        }
    }
    Ok(TimeSplit { chain, slices, vertical })
}
