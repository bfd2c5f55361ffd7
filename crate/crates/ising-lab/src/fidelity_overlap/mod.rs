//! Ground-state fidelity overlaps of the transverse Ising model through
//! classical partition functions: a discretized adiabatic plan, its Trotter
//! circuit, the complex six-coupling slab model whose partition function
//! equals the circuit overlap, and reconstruction of that value from
//! real-coupling samples on a tensor mesh.

mod couplings;
mod mesh;
mod slab;

pub use couplings::{beta_star, epsilon_for, transfer_scalar, CouplingVector};
pub use mesh::{g_function, mesh_reconstruct, mesh_reconstruct_fixed, precision_bound, precision_bound_ln, MeshAxis, MeshSpec, G_MIN};
pub use slab::{overlap_instance, OverlapInstance};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::Serialize;

use crate::circuit_sim::{evolve, CircuitProgram, DiagonalLayer, GLayer, Layer};
use crate::error::{Error, Result};
use crate::ising_core::Lattice;

/// Largest lattice for exact diagonalization.
pub const DIAG_SITE_CAP: usize = 12;

/// `Ĥ* = −h⊥Σσ^x − JΣσ^zσ^z − hΣσ^z` on `lattice`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumIsingParams {
    h_perp: f64,
    j: f64,
    h: f64,
    lattice: Lattice,
}

impl QuantumIsingParams {
    pub fn new(h_perp: f64, j: f64, h: f64, lattice: Lattice) -> Result<Self> {
        if !(h_perp > 0.0 && h_perp.is_finite()) {
            return Err(Error::InvalidArgument(format!("transverse field must be positive, got {h_perp}")));
        }
        if !(j.is_finite() && h.is_finite()) {
            return Err(Error::InvalidArgument("couplings must be finite".into()));
        }
        Ok(Self { h_perp, j, h, lattice })
    }

    pub fn h_perp(&self) -> f64 {
        self.h_perp
    }

    pub fn j(&self) -> f64 {
        self.j
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    /// `|h||Λ| + |J||E|`, the norm scale of `Ĥ₁`.
    pub fn diagonal_norm(&self) -> f64 {
        self.h.abs() * self.lattice.vertex_count() as f64 + self.j.abs() * self.lattice.edge_count() as f64
    }

    /// Dense `Ĥ₀ + s Ĥ₁(T)`; basis bit 0 of site `k` means `σ^z_k = +1`.
    pub fn hamiltonian(&self, s: f64) -> Result<DMatrix<f64>> {
        let n = self.lattice.vertex_count();
        if n > DIAG_SITE_CAP {
            return Err(Error::CapExceeded { what: "diagonalization sites", size: n, cap: DIAG_SITE_CAP });
        }
        let dim = 1usize << n;
        let spin = |b: usize, k: usize| if (b >> k) & 1 == 0 { 1.0 } else { -1.0 };
        Ok(DMatrix::from_fn(dim, dim, |r, c| {
            if r == c {
                let bonds: f64 = self.lattice.edges().iter().map(|&(a, b)| spin(r, a) * spin(r, b)).sum();
                let field: f64 = (0..n).map(|k| spin(r, k)).sum();
                -s * (self.j * bonds + self.h * field)
            } else if (r ^ c).count_ones() == 1 {
                -self.h_perp
            } else {
                0.0
            }
        }))
    }

    /// Ground state of `Ĥ*`, sign fixed so its overlap with `|+⟩` is positive.
    pub fn ground_state(&self) -> Result<Vec<f64>> {
        let eig = SymmetricEigen::new(self.hamiltonian(1.0)?);
        let i = eig.eigenvalues.imin();
        let v: Vec<f64> = eig.eigenvectors.column(i).iter().copied().collect();
        let sign = if v.iter().sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
        Ok(v.into_iter().map(|x| sign * x).collect())
    }
}

/// `min_s gap(Ĥ₀ + sĤ₁(T))` over `samples + 1` equally spaced `s ∈ [0, 1]`.
pub fn min_gap(params: &QuantumIsingParams, samples: usize) -> Result<f64> {
    let samples = samples.max(1);
    let mut best = f64::INFINITY;
    for i in 0..=samples {
        let mut w: Vec<f64> = SymmetricEigen::new(params.hamiltonian(i as f64 / samples as f64)?).eigenvalues.iter().copied().collect();
        w.sort_by(f64::total_cmp);
        best = best.min(w.get(1).map_or(f64::INFINITY, |e| e - w[0]));
    }
    Ok(best)
}

/// Discretized adiabatic evolution `U_{L−1}⋯U₀`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdiabaticPlan {
    pub total_time: f64,
    pub steps: usize,
    pub tau: f64,
    pub gamma: f64,
    pub delta: f64,
    /// Bound on the distance of the final state from the true ground state.
    pub deviation: f64,
    /// Trotter-splitting constant; not fixed by theory.
    pub bch_constant: f64,
}

/// `T* = (10⁵/δ²)(|h||Λ| + |J||E|)³/γ⁴`.
pub fn adiabatic_time(params: &QuantumIsingParams, delta: f64, gamma: f64) -> f64 {
    1e5 / (delta * delta) * params.diagonal_norm().powi(3) / gamma.powi(4)
}

/// Plan with `T = T*` and `K = 1`.
pub fn adiabatic_plan(params: &QuantumIsingParams, delta: f64, gamma: f64, steps: usize) -> Result<AdiabaticPlan> {
    if !(delta > 0.0 && gamma > 0.0) {
        return Err(Error::InvalidArgument(format!("need δ, γ > 0, got δ = {delta}, γ = {gamma}")));
    }
    AdiabaticPlan::with_time(params, adiabatic_time(params, delta, gamma), steps, delta, gamma, 1.0)
}

impl AdiabaticPlan {
    /// Plan with an explicit total time, for circuits shorter than `T*`.
    pub fn with_time(
        params: &QuantumIsingParams,
        total_time: f64,
        steps: usize,
        delta: f64,
        gamma: f64,
        bch_constant: f64,
    ) -> Result<Self> {
        if steps == 0 || !(total_time >= 0.0 && total_time.is_finite()) {
            return Err(Error::InvalidArgument(format!("need L ≥ 1 and finite T ≥ 0, got L = {steps}, T = {total_time}")));
        }
        let tau = total_time / steps as f64;
        let norm = params.diagonal_norm();
        let sites = params.lattice.vertex_count() as f64;
        let deviation = delta
            + total_time * (2.0 * norm / steps as f64).sqrt()
            + bch_constant * steps as f64 * norm * params.h_perp * sites * tau * tau;
        Ok(Self { total_time, steps, tau, gamma, delta, deviation, bch_constant })
    }
}

/// Layers for `U_k = e^{−iτĤ₀} e^{−iτĤ₁(kτ)}`, `k = 0..L−1`.
///
/// `e^{−iτĤ₀} = e^{iτh⊥σ^x} = e^{iτh⊥} G(−2τh⊥)`; the phase goes into the
/// diagonal layer's offsets so the program equals the product exactly.
pub fn trotter_circuit(params: &QuantumIsingParams, plan: &AdiabaticPlan) -> Result<CircuitProgram> {
    let n = params.lattice.vertex_count();
    let e = params.lattice.edge_count();
    let mut layers = Vec::with_capacity(2 * plan.steps);
    for k in 0..plan.steps {
        let s = if plan.total_time > 0.0 { k as f64 * plan.tau * plan.tau / plan.total_time } else { 0.0 };
        layers.push(Layer::Diagonal(DiagonalLayer {
            alpha: 1.0,
            couplings: vec![s * params.j; e],
            fields: vec![s * params.h; n],
            offsets: vec![plan.tau * params.h_perp; n],
        }));
        layers.push(Layer::G(GLayer { theta: vec![-2.0 * plan.tau * params.h_perp; n] }));
    }
    CircuitProgram::new(params.lattice.clone(), layers)
}

/// `⟨+|W₀†⋯W†_{L′−1} U_{L−1}⋯U₀|+⟩` by statevector simulation.
pub fn circuit_overlap(
    params: &QuantumIsingParams,
    plan: &AdiabaticPlan,
    params2: &QuantumIsingParams,
    plan2: &AdiabaticPlan,
) -> Result<Complex64> {
    let u = evolve(&trotter_circuit(params, plan)?)?;
    let w = evolve(&trotter_circuit(params2, plan2)?)?;
    w.inner(&u)
}

/// `⟨G̃|G⟩` from exact ground states.
pub fn ground_state_fidelity(params: &QuantumIsingParams, params2: &QuantumIsingParams) -> Result<f64> {
    let (a, b) = (params.ground_state()?, params2.ground_state()?);
    crate::error::check_len("ground state dimension", a.len(), b.len())?;
    Ok(a.iter().zip(&b).map(|(x, y)| x * y).sum())
}

/// One row of a fidelity sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub h_perp: f64,
    pub re: f64,
    pub im: f64,
    pub abs: f64,
}

/// `f(h⊥, h⊥ + δh⊥)` at `h = h′ = 0`, `J′ = J`, from exact ground states.
pub fn fidelity_sweep(lattice: &Lattice, j: f64, h_perps: &[f64], dh: f64) -> Result<Vec<SweepRow>> {
    h_perps
        .iter()
        .map(|&hp| {
            let a = QuantumIsingParams::new(hp, j, 0.0, lattice.clone())?;
            let b = QuantumIsingParams::new(hp + dh, j, 0.0, lattice.clone())?;
            let f = ground_state_fidelity(&a, &b)?;
            Ok(SweepRow { h_perp: hp, re: f, im: 0.0, abs: f.abs() })
        })
        .collect()
}

/// Writes sweep rows as CSV with header `h_perp,re_f,im_f,abs_f`.
pub fn write_sweep_csv<W: std::io::Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["h_perp", "re_f", "im_f", "abs_f"])?;
    for r in rows {
        w.write_record([r.h_perp, r.re, r.im, r.abs].map(|x| format!("{x:.12e}")))?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain2(hp: f64) -> QuantumIsingParams {
        QuantumIsingParams::new(hp, 1.0, 0.0, Lattice::chain(2, false).unwrap()).unwrap()
    }

    fn expm_i(h: &DMatrix<f64>, t: f64) -> DMatrix<Complex64> {
        // exp(−iHt) through the eigendecomposition of the real symmetric H.
        let eig = SymmetricEigen::new(h.clone());
        let v = eig.eigenvectors.map(|x| Complex64::new(x, 0.0));
        let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|e| Complex64::from_polar(1.0, -e * t)));
        &v * d * v.adjoint()
    }

    #[test]
    fn plan_scalings() {
        let p = chain2(1.0);
        let gamma = min_gap(&p, 200).unwrap();
        assert!(gamma > 0.0);
        let a = adiabatic_plan(&p, 0.5, gamma, 10).unwrap();
        let b = adiabatic_plan(&p, 0.5, gamma / 2.0, 10).unwrap();
        assert!((b.total_time / a.total_time - 16.0).abs() < 1e-9);
        let mut prev = f64::INFINITY;
        for l in [1, 4, 16, 64] {
            let plan = AdiabaticPlan::with_time(&p, 5.0, l, 0.1, gamma, 0.0).unwrap();
            assert!(plan.deviation <= prev);
            prev = plan.deviation;
        }
    }

    #[test]
    fn two_site_gap_and_time() {
        // For J = h⊥ = 1 the gap on the path is closed-form enough to cross-check:
        // at s = 0 it is 2h⊥, and T* = 10⁵/0.25 · 1/γ⁴.
        let p = chain2(1.0);
        let gamma = min_gap(&p, 400).unwrap();
        let plan = adiabatic_plan(&p, 0.5, gamma, 100).unwrap();
        assert!((plan.total_time - 4e5 / gamma.powi(4)).abs() < 1e-6 * plan.total_time);
        assert!(gamma <= 2.0 + 1e-12);
    }

    #[test]
    fn zero_time_circuit_is_identity() {
        let p = chain2(1.0);
        let plan = AdiabaticPlan::with_time(&p, 0.0, 1, 0.1, 1.0, 1.0).unwrap();
        let u = evolve(&trotter_circuit(&p, &plan).unwrap()).unwrap();
        let plus = crate::circuit_sim::QuantumState::plus_x(2);
        assert!((plus.inner(&u).unwrap() - 1.0).norm() < 1e-12);
    }

    #[test]
    fn circuit_matches_trotter_product() {
        let p = QuantumIsingParams::new(0.7, 1.3, 0.4, Lattice::chain(3, false).unwrap()).unwrap();
        let plan = AdiabaticPlan::with_time(&p, 2.0, 3, 0.1, 1.0, 1.0).unwrap();
        let h0 = p.hamiltonian(0.0).unwrap();
        let h1_full = p.hamiltonian(1.0).unwrap() - &h0;
        let mut u = DMatrix::<Complex64>::identity(8, 8);
        for k in 0..plan.steps {
            let s = k as f64 * plan.tau / plan.total_time;
            u = expm_i(&h0, plan.tau) * expm_i(&(&h1_full * s), plan.tau) * u;
        }
        let plus = DMatrix::from_element(8, 1, Complex64::new(8f64.sqrt().recip(), 0.0));
        let want = u * &plus;
        let got = evolve(&trotter_circuit(&p, &plan).unwrap()).unwrap();
        for (a, b) in got.amplitudes().iter().zip(want.iter()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn trotter_error_is_second_order() {
        let p = QuantumIsingParams::new(1.0, 1.0, 0.5, Lattice::chain(2, false).unwrap()).unwrap();
        let h0 = p.hamiltonian(0.0).unwrap();
        let h1 = p.hamiltonian(1.0).unwrap() - &h0;
        let err = |tau: f64| (expm_i(&h0, tau) * expm_i(&h1, tau) - expm_i(&(&h0 + &h1), tau)).norm();
        let (a, b) = (1e-3f64, 1e-1f64);
        let slope = (err(b).ln() - err(a).ln()) / (b.ln() - a.ln());
        assert!((slope - 2.0).abs() < 0.1, "{slope}");
    }

    #[test]
    fn adiabatic_state_is_within_plan_deviation() {
        let p = chain2(1.0);
        let gamma = min_gap(&p, 200).unwrap();
        let plan = AdiabaticPlan::with_time(&p, 20.0, 400, 0.05, gamma, 1.0).unwrap();
        let state = evolve(&trotter_circuit(&p, &plan).unwrap()).unwrap();
        let g = p.ground_state().unwrap();
        let ov: Complex64 = state.amplitudes().iter().zip(&g).map(|(a, &x)| a * x).sum();
        assert!(ov.norm() >= 1.0 - plan.deviation.min(1.0));
        assert!(ov.norm() > 0.99, "{}", ov.norm());
    }

    #[test]
    fn fidelity_dip_drifts_toward_critical_point() {
        // At desk sizes the minimum of |f(h⊥, h⊥ + 0.2)| sits well below J and
        // moves toward it as the chain grows.
        let hs: Vec<f64> = (0..60).map(|i| 0.1 + 0.05 * i as f64).collect();
        let mut prev = 0.0;
        for n in [3, 4, 6] {
            let rows = fidelity_sweep(&Lattice::chain(n, false).unwrap(), 1.0, &hs, 0.2).unwrap();
            let dip = rows.iter().min_by(|a, b| a.abs.total_cmp(&b.abs)).unwrap();
            assert!(dip.h_perp > prev && dip.h_perp < 1.0, "n = {n}: dip at {}", dip.h_perp);
            assert!(dip.abs < rows.last().unwrap().abs);
            prev = dip.h_perp;
        }
    }

    #[test]
    fn sweep_csv_has_header_and_rows() {
        let rows = fidelity_sweep(&Lattice::chain(2, false).unwrap(), 1.0, &[0.5, 1.0], 0.2).unwrap();
        let mut buf = Vec::new();
        write_sweep_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("h_perp,re_f,im_f,abs_f\n"));
        assert_eq!(text.lines().count(), 3);
    }
}
