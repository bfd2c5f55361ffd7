use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_4, LN_2};

use num_complex::Complex64;

use super::program::{CircuitProgram, Layer};
use crate::error::{Error, Result};
use crate::ising_core::{partition_function, IsingModel, Lattice, Method, Weight};

/// Which boundary the amplitude closes with.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    /// `⟨+_x|W|+_x⟩`: first and last slices summed freely.
    Open,
    /// `Tr[W]/2^n`: last slice identified with the first.
    Trace,
}

/// Classical image of a circuit: `amplitude = exp(log_prefactor)·Z(β = 1)`
/// for `model` on the enlarged lattice of `slices × n` sites.
#[derive(Debug, Clone)]
pub struct EnlargedModel {
    pub model: IsingModel<Complex64>,
    pub log_prefactor: Complex64,
    pub slices: usize,
}

impl EnlargedModel {
    pub fn amplitude(&self, method: Method) -> Result<Complex64> {
        Ok(self.log_prefactor.exp() * partition_function(&self.model, Complex64::new(1.0, 0.0), method)?)
    }
}

/// `(J↓, B)` with `⟨σ'|U(θ)|σ⟩ = exp[J↓σσ' + iπ/4(σ' − σ) + B]`.
///
/// Equivalent to `J↓ = −½ln tanθ − iπ/4`, `B = ½ln(cosθ sinθ) + iπ/4` on
/// `(0, π/2)` and continues analytically elsewhere. Fails where
/// `cosθ` or `sinθ` vanishes.
pub fn rotation_exponents(theta: Complex64) -> Result<(Complex64, Complex64)> {
    let (c, s) = (theta.cos(), theta.sin());
    if c == Complex64::new(0.0, 0.0) || s == Complex64::new(0.0, 0.0) {
        return Err(Error::Singular(format!("rotation angle {theta} has no exponential form")));
    }
    let j_down = 0.5 * (-Complex64::i() * c / s).ln();
    Ok((j_down, c.ln() - j_down))
}

/// `(J, B)` with `⟨σ'|G(θ)|σ⟩ = exp[Jσσ' + B]`.
pub fn g_exponents(theta: Complex64) -> Result<(Complex64, Complex64)> {
    let e = (Complex64::i() * theta).exp();
    let (d, o) = ((1.0 + e) * 0.5, (1.0 - e) * 0.5);
    if d == Complex64::new(0.0, 0.0) || o == Complex64::new(0.0, 0.0) {
        return Err(Error::Singular(format!("G angle {theta} has no exponential form")));
    }
    let (ld, lo) = (d.ln(), o.ln());
    Ok((0.5 * (ld - lo), 0.5 * (ld + lo)))
}

/// Maps a program to an Ising model with complex couplings by inserting a
/// resolution of the identity after every rotation or G layer.
pub fn enlarged_model<W: Weight>(program: &CircuitProgram<W>, boundary: Boundary) -> Result<EnlargedModel> {
    let n = program.qubits();
    let lattice = program.lattice();
    let slices = program.time_slices();
    let i = Complex64::i();
    let mut fields = vec![Complex64::new(0.0, 0.0); n * slices];
    let mut couplings: BTreeMap<(usize, usize), Complex64> = BTreeMap::new();
    let mut log_pref = Complex64::new(-(n as f64) * LN_2, 0.0);
    let mut t = 0;
    for layer in program.layers() {
        match layer {
            Layer::Diagonal(d) => {
                let a: Complex64 = i * d.alpha.into();
                for &k in &d.offsets {
                    log_pref += a * k.into();
                }
                for (k, &h) in d.fields.iter().enumerate() {
                    fields[t * n + k] += a * h.into();
                }
                for (&(u, v), &j) in lattice.edges().iter().zip(&d.couplings) {
                    *couplings.entry(edge(t * n + u, t * n + v)).or_default() += a * j.into();
                }
            }
            Layer::Phase(p) => {
                for (k, &phi) in p.phi.iter().enumerate() {
                    fields[t * n + k] += i * phi.into();
                }
            }
            Layer::Rotation(r) => {
                for (k, &theta) in r.theta.iter().enumerate() {
                    let (jd, b) = rotation_exponents(theta.into())?;
                    *couplings.entry(edge(t * n + k, (t + 1) * n + k)).or_default() += jd;
                    fields[t * n + k] -= i * FRAC_PI_4;
                    fields[(t + 1) * n + k] += i * FRAC_PI_4;
                    log_pref += b;
                }
                t += 1;
            }
            Layer::G(g) => {
                for (k, &theta) in g.theta.iter().enumerate() {
                    let (jd, b) = g_exponents(theta.into())?;
                    *couplings.entry(edge(t * n + k, (t + 1) * n + k)).or_default() += jd;
                    log_pref += b;
                }
                t += 1;
            }
        }
    }
    let (vertex_count, slices) = match boundary {
        Boundary::Trace if slices > 1 => {
            // Fold the last slice onto the first.
            let last = (slices - 1) * n;
            let fold = |v: usize| if v >= last { v - last } else { v };
            let (head, tail) = fields.split_at_mut(last);
            for (k, f) in tail.iter().enumerate() {
                head[k] += f;
            }
            fields.truncate(last);
            let mut folded: BTreeMap<(usize, usize), Complex64> = BTreeMap::new();
            for ((u, v), j) in couplings {
                let (u, v) = (fold(u), fold(v));
                if u == v {
                    log_pref += j;
                } else {
                    *folded.entry(edge(u, v)).or_default() += j;
                }
            }
            couplings = folded;
            (last, slices - 1)
        }
        _ => (n * slices, slices),
    };
    let (edges, values): (Vec<_>, Vec<_>) = couplings.into_iter().unzip();
    let model = IsingModel::new(Lattice::irregular(vertex_count, edges)?, values, fields)?;
    Ok(EnlargedModel {
        model,
        log_prefactor: log_pref,
        slices,
    })
}

fn edge(u: usize, v: usize) -> (usize, usize) {
    (u.min(v), u.max(v))
}
