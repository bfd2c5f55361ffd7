//! Classical Ising ground truth: lattices, models, exact partition functions,
//! degeneracy counts and conditional magnetizations.
//!
//! Conventions used throughout the crate:
//! * `H(σ) = −Σ h_i σ_i − Σ J_ij σ_i σ_j` and `Z(β) = Σ_σ exp(−β H(σ))`.
//! * Spin `i` is bit `i` of a packed word; bit 0 means σ = +1, bit 1 means σ = −1.

mod lattice;
mod model;
mod partition;
mod transfer;

pub use lattice::{Geometry, Lattice};
pub use model::{IsingModel, PinnedSet, SpinConfiguration, Weight};
pub use partition::{
    corner_magnetization, partition_function, partition_function_capped, xi_coefficients, Caps, Method,
};

pub(crate) use model::spin_of;

/// Loads a model from the JSON interchange schema.
pub fn read_model<W: Weight>(path: &std::path::Path) -> crate::Result<IsingModel<W>> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}
