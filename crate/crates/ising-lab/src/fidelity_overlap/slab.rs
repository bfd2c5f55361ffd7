use num_complex::Complex64;

use super::couplings::{beta_star, transfer_scalar, CouplingVector};
use super::mesh::{mesh_reconstruct, mesh_reconstruct_fixed, MeshSpec};
use crate::bqp_reduction::{FixedComplex, Field};
use super::{AdiabaticPlan, QuantumIsingParams};
use crate::error::{Error, Result};
use crate::ising_core::{IsingModel, Lattice};

/// Largest `|Λ|` for the layer-transfer evaluation.
pub const SLAB_WIDTH_CAP: usize = 16;

/// Diagonal terms on one layer: `β_axis · k · (Σ_E σσ + r Σσ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct DiagTerm {
    axis: usize,
    multiplier: usize,
    ratio: f64,
}

/// Classical model on `2(L + L′) + 1` copies of `Λ` whose partition function,
/// times [`OverlapInstance::prefactor`], is the circuit overlap.
///
/// Layer `2k` carries the diagonal part of `U_k` and is joined to the next two
/// layers by `β₋`, `β₊`. After layer `2L` each `W†_m`, `m = L′−1..0`, adds
/// `β′₊`, `β′₋` bonds and then its diagonal part, so the primed diagonal terms
/// sit on the layer after their transfer bonds.
#[derive(Debug, Clone, PartialEq)]
pub struct OverlapInstance {
    lattice: Lattice,
    diag: Vec<Option<DiagTerm>>,
    /// Axis of the bonds between layer `s` and `s + 1`.
    gaps: Vec<usize>,
    prefactor: f64,
    target: CouplingVector,
    degrees: [Option<usize>; 6],
}

fn integer_ratio(h: f64, j: f64) -> Option<usize> {
    let r = (h / j).abs();
    (r.fract() == 0.0).then_some(r as usize)
}

/// Builds the slab for the overlap of two Trotter circuits on the same lattice.
pub fn overlap_instance(
    params: &QuantumIsingParams,
    plan: &AdiabaticPlan,
    params2: &QuantumIsingParams,
    plan2: &AdiabaticPlan,
) -> Result<OverlapInstance> {
    if params.lattice() != params2.lattice() {
        return Err(Error::InvalidArgument("both Hamiltonians must live on the same lattice".into()));
    }
    if params.j() == 0.0 || params2.j() == 0.0 {
        return Err(Error::Unsupported("the slab couplings are scaled by J, which must be nonzero".into()));
    }
    let sites = params.lattice().vertex_count();
    if sites > SLAB_WIDTH_CAP {
        return Err(Error::CapExceeded { what: "slab width |Λ|", size: sites, cap: SLAB_WIDTH_CAP });
    }
    let (l, l2) = (plan.steps, plan2.steps);
    let target = beta_star(
        plan.tau,
        params.h_perp(),
        plan2.tau,
        params2.h_perp(),
        params.j(),
        params2.j(),
        plan.total_time,
        plan2.total_time,
        l,
        l2,
    )?;
    let layers = 2 * (l + l2) + 1;
    let mut diag = vec![None; layers];
    let mut gaps = Vec::with_capacity(layers - 1);
    let ratio = params.h() / params.j();
    for k in 0..l {
        diag[2 * k] = Some(DiagTerm { axis: 4, multiplier: k, ratio });
        gaps.extend([1, 0]);
    }
    let ratio2 = params2.h() / params2.j();
    for r in 0..l2 {
        let m = l2 - 1 - r;
        gaps.extend([2, 3]);
        diag[2 * l + 2 * r + 2] = Some(DiagTerm { axis: 5, multiplier: m, ratio: ratio2 });
    }
    let edges = params.lattice().edge_count();
    let spatial = |steps: usize, ratio: Option<usize>| ratio.map(|r| steps * (steps - 1) / 2 * (edges + r * sites));
    let degrees = [
        Some(l * sites),
        Some(l * sites),
        Some(l2 * sites),
        Some(l2 * sites),
        spatial(l, integer_ratio(params.h(), params.j())),
        spatial(l2, integer_ratio(params2.h(), params2.j())),
    ];
    let prefactor = 2f64.powi(-(sites as i32))
        * transfer_scalar(target.eps).powi((l * sites) as i32)
        * transfer_scalar(target.eps_prime).powi((l2 * sites) as i32);
    Ok(OverlapInstance { lattice: params.lattice().clone(), diag, gaps, prefactor, target, degrees })
}

impl OverlapInstance {
    pub fn layers(&self) -> usize {
        self.diag.len()
    }

    /// `2^{−|Λ|} [√((1−ε²)/(ε⁴+4))]^{L|Λ|} [√((1−ε′²)/(ε′⁴+4))]^{L′|Λ|}`.
    pub fn prefactor(&self) -> f64 {
        self.prefactor
    }

    pub fn target(&self) -> &CouplingVector {
        &self.target
    }

    /// Half-degrees `m_j`: coupling `j` enters `Z` as `e^{β_j g}` with
    /// `|g| ≤ m_j`. `None` when a field-to-coupling ratio is not an integer.
    pub fn half_degrees(&self) -> [Option<usize>; 6] {
        self.degrees
    }

    /// `Z(β⃗)` by transfer along the layers, `O(layers · |Λ| · 2^{|Λ|})`.
    pub fn partition(&self, betas: &[Complex64; 6]) -> Complex64 {
        let n = self.lattice.vertex_count();
        let dim = 1usize << n;
        let spin = |b: usize, k: usize| if (b >> k) & 1 == 0 { 1.0 } else { -1.0 };
        let bonds: Vec<f64> =
            (0..dim).map(|b| self.lattice.edges().iter().map(|&(u, v)| spin(b, u) * spin(b, v)).sum()).collect();
        let fields: Vec<f64> = (0..dim).map(|b| (0..n).map(|k| spin(b, k)).sum()).collect();
        let apply_diag = |v: &mut [Complex64], term: &Option<DiagTerm>| {
            if let Some(t) = term {
                let c = betas[t.axis] * t.multiplier as f64;
                for (b, x) in v.iter_mut().enumerate() {
                    *x *= (c * (bonds[b] + t.ratio * fields[b])).exp();
                }
            }
        };
        let mut v = vec![Complex64::new(1.0, 0.0); dim];
        apply_diag(&mut v, &self.diag[0]);
        for (s, &axis) in self.gaps.iter().enumerate() {
            let (same, flip) = (betas[axis].exp(), (-betas[axis]).exp());
            for k in 0..n {
                let half = 1usize << k;
                for block in v.chunks_mut(2 * half) {
                    let (lo, hi) = block.split_at_mut(half);
                    for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                        let (x, y) = (*a, *b);
                        *a = same * x + flip * y;
                        *b = flip * x + same * y;
                    }
                }
            }
            apply_diag(&mut v, &self.diag[s + 1]);
        }
        v.into_iter().sum()
    }

    /// `prefactor · Z(β⃗*)`.
    pub fn overlap(&self) -> Complex64 {
        self.prefactor * self.partition(&self.target.betas)
    }

    /// Full mesh with `n_j = 2m_j`; needs integer `h/J` and `h′/J′`.
    pub fn mesh(&self) -> Result<MeshSpec> {
        let mut half = [0; 6];
        for (j, d) in self.degrees.iter().enumerate() {
            half[j] = d.ok_or_else(|| Error::Unsupported("mesh needs h/J and h′/J′ to be integers".into()))?;
        }
        Ok(MeshSpec::full(half))
    }

    /// Overlap rebuilt from real-coupling samples of `Z` on `mesh`.
    pub fn reconstruct_overlap<F>(&self, sampler: F, mesh: &MeshSpec) -> Result<Complex64>
    where
        F: Fn(&[f64; 6]) -> Result<Complex64> + Sync,
    {
        Ok(self.prefactor * mesh_reconstruct(sampler, mesh, &self.target.betas)?)
    }

    /// `p(x⃗) = Z(−ln x⃗) Π x_j^{m_j}` in fixed point. Every factor is a
    /// nonnegative power of some `x_j`, so nothing is divided; needs the mesh
    /// degrees, i.e. integer field ratios.
    pub fn scaled_partition_fixed(&self, xs: &[FixedComplex; 6]) -> Result<FixedComplex> {
        self.mesh()?;
        let n = self.lattice.vertex_count();
        let dim = 1usize << n;
        let spin = |b: usize, k: usize| if (b >> k) & 1 == 0 { 1i64 } else { -1 };
        let edges = self.lattice.edge_count() as i64;
        let bonds: Vec<i64> =
            (0..dim).map(|b| self.lattice.edges().iter().map(|&(u, v)| spin(b, u) * spin(b, v)).sum()).collect();
        let fields: Vec<i64> = (0..dim).map(|b| (0..n).map(|k| spin(b, k)).sum()).collect();
        let one = xs[0].one_like();
        let pow = |x: &FixedComplex, e: u64| (0..e).fold(one.clone(), |acc, _| acc * x.clone());
        let apply_diag = |v: &mut [FixedComplex], term: &Option<DiagTerm>| {
            if let Some(t) = term {
                let (k, r) = (t.multiplier as i64, t.ratio as i64);
                let powers: Vec<FixedComplex> =
                    (0..=2 * (edges + r.abs() * n as i64) * k).map(|e| pow(&xs[t.axis], e as u64)).collect();
                for (b, x) in v.iter_mut().enumerate() {
                    let e = k * (edges - bonds[b] + r.abs() * n as i64 - r * fields[b]);
                    *x = x.clone() * powers[e as usize].clone();
                }
            }
        };
        let mut v = vec![one.clone(); dim];
        apply_diag(&mut v, &self.diag[0]);
        for (s, &axis) in self.gaps.iter().enumerate() {
            // x·T(β) = [[1, x²], [x², 1]] per site.
            let sq = xs[axis].clone() * xs[axis].clone();
            for k in 0..n {
                let half = 1usize << k;
                for block in v.chunks_mut(2 * half) {
                    let (lo, hi) = block.split_at_mut(half);
                    for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                        let (x, y) = (a.clone(), b.clone());
                        *a = x.clone() + sq.clone() * y.clone();
                        *b = sq.clone() * x + y;
                    }
                }
            }
            apply_diag(&mut v, &self.diag[s + 1]);
        }
        Ok(v.into_iter().fold(FixedComplex::zero(one.bits()), |a, b| a + b))
    }

    /// [`Self::reconstruct_overlap`] with the exact fixed-point sampler.
    pub fn reconstruct_overlap_fixed(&self, mesh: &MeshSpec, bits: u32) -> Result<Complex64> {
        Ok(self.prefactor * mesh_reconstruct_fixed(|x| self.scaled_partition_fixed(x), mesh, &self.target.betas, bits)?)
    }

    /// The slab as an explicit model with unit inverse temperature: spin
    /// `x + |Λ|·s` is site `x` of layer `s`.
    pub fn model(&self, betas: &[Complex64; 6]) -> Result<IsingModel<Complex64>> {
        let n = self.lattice.vertex_count();
        let mut edges = Vec::new();
        let mut couplings = Vec::new();
        let mut fields = vec![Complex64::new(0.0, 0.0); n * self.layers()];
        for (s, term) in self.diag.iter().enumerate() {
            if let Some(t) = term {
                let c = betas[t.axis] * t.multiplier as f64;
                for &(u, v) in self.lattice.edges() {
                    edges.push((u + n * s, v + n * s));
                    couplings.push(c);
                }
                for x in 0..n {
                    fields[x + n * s] = c * t.ratio;
                }
            }
        }
        for (s, &axis) in self.gaps.iter().enumerate() {
            for x in 0..n {
                edges.push((x + n * s, x + n * (s + 1)));
                couplings.push(betas[axis]);
            }
        }
        IsingModel::new(Lattice::irregular(n * self.layers(), edges)?, couplings, fields)
    }
}

#[cfg(test)]
mod tests {
    use super::super::circuit_overlap;
    use super::*;
    use crate::ising_core::{partition_function, Method};

    fn setup(hp: f64, hp2: f64, h: f64, l: usize, l2: usize) -> (QuantumIsingParams, AdiabaticPlan, QuantumIsingParams, AdiabaticPlan) {
        let lat = Lattice::chain(2, false).unwrap();
        let a = QuantumIsingParams::new(hp, 1.0, h, lat.clone()).unwrap();
        let b = QuantumIsingParams::new(hp2, 1.0, h, lat).unwrap();
        let pa = AdiabaticPlan::with_time(&a, 1.2, l, 0.1, 1.0, 1.0).unwrap();
        let pb = AdiabaticPlan::with_time(&b, 0.9, l2, 0.1, 1.0, 1.0).unwrap();
        (a, pa, b, pb)
    }

    #[test]
    fn identical_plans_give_unit_overlap() {
        let (a, pa, _, _) = setup(1.0, 1.0, 0.0, 2, 2);
        let inst = overlap_instance(&a, &pa, &a, &pa).unwrap();
        assert!((inst.overlap() - 1.0).norm() < 1e-8);
    }

    #[test]
    fn slab_matches_statevector() {
        for (hp, hp2, h, l, l2) in [(1.0, 1.2, 0.0, 2, 2), (0.7, 1.0, 0.3, 3, 2), (1.1, 0.4, 1.0, 2, 3)] {
            let (a, pa, b, pb) = setup(hp, hp2, h, l, l2);
            let inst = overlap_instance(&a, &pa, &b, &pb).unwrap();
            let want = circuit_overlap(&a, &pa, &b, &pb).unwrap();
            assert!((inst.overlap() - want).norm() < 1e-8, "{} vs {want}", inst.overlap());
        }
    }

    #[test]
    fn explicit_model_agrees_with_transfer() {
        let (a, pa, b, pb) = setup(1.0, 1.2, 0.0, 2, 2);
        let inst = overlap_instance(&a, &pa, &b, &pb).unwrap();
        let betas = inst.target().betas;
        let z = partition_function(&inst.model(&betas).unwrap(), Complex64::new(1.0, 0.0), Method::Enumerate).unwrap();
        assert!((z - inst.partition(&betas)).norm() < 1e-9 * z.norm().max(1.0));
    }

    #[test]
    fn mesh_reconstruction_agrees() {
        let (a, pa, b, pb) = setup(1.0, 1.2, 0.0, 2, 2);
        let inst = overlap_instance(&a, &pa, &b, &pb).unwrap();
        let mesh = inst.mesh().unwrap();
        assert_eq!(mesh.point_count(), 9usize.pow(4) * 9);
        let want = circuit_overlap(&a, &pa, &b, &pb).unwrap();
        // Double-precision samples cannot survive the ~10¹⁸ weight growth.
        let loose = inst.reconstruct_overlap(|x| Ok(inst.partition(&x.map(Complex64::from))), &mesh).unwrap();
        assert!((loose - want).norm() > 1e-6);
        let got = inst.reconstruct_overlap_fixed(&mesh, 256).unwrap();
        assert!((got - want).norm() < 1e-6, "{got} vs {want}");
        assert!((got - inst.overlap()).norm() < 1e-6);
    }

    #[test]
    fn non_integer_ratio_has_no_mesh() {
        let (a, pa, b, pb) = setup(1.0, 1.2, 0.3, 2, 2);
        assert!(overlap_instance(&a, &pa, &b, &pb).unwrap().mesh().is_err());
    }

    #[test]
    fn prefactor_and_degrees() {
        let (a, pa, b, pb) = setup(1.0, 1.2, 0.0, 2, 2);
        let inst = overlap_instance(&a, &pa, &b, &pb).unwrap();
        let t = inst.target();
        let want = 0.25 * transfer_scalar(t.eps).powi(4) * transfer_scalar(t.eps_prime).powi(4);
        assert!((inst.prefactor() - want).abs() < 1e-15);
        assert_eq!(inst.half_degrees(), [Some(4), Some(4), Some(4), Some(4), Some(1), Some(1)]);
        assert_eq!(inst.layers(), 9);
    }
}
