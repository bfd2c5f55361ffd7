use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::state::{Gate2, QuantumState};
use crate::error::{check_len, Result};
use crate::ising_core::{spin_of, Lattice, Weight};

/// Controlled-phase layer: basis state `σ` picks up
/// `exp[iα(Σκ_k + Σh_k σ_k + ΣJ_kl σ_k σ_l)]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "W: Weight", deserialize = "W: Weight"))]
pub struct DiagonalLayer<W: Weight = f64> {
    pub alpha: W,
    /// One entry per lattice edge, in lattice edge order.
    pub couplings: Vec<W>,
    pub fields: Vec<W>,
    /// Per-site constant offsets κ_k; an empty list means all zero.
    #[serde(default)]
    pub offsets: Vec<W>,
}

/// Per-site rotation `|+⟩ → cosθ|+⟩ + sinθ|−⟩`, `|−⟩ → −sinθ|+⟩ + cosθ|−⟩`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "W: Weight", deserialize = "W: Weight"))]
pub struct RotationLayer<W: Weight = f64> {
    pub theta: Vec<W>,
}

/// Per-site phase `|σ⟩ → e^{iφσ}|σ⟩`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "W: Weight", deserialize = "W: Weight"))]
pub struct PhaseLayer<W: Weight = f64> {
    pub phi: Vec<W>,
}

/// Per-site `G(θ) = Had·diag(1, e^{iθ})·Had`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "W: Weight", deserialize = "W: Weight"))]
pub struct GLayer<W: Weight = f64> {
    pub theta: Vec<W>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
#[serde(bound(serialize = "W: Weight", deserialize = "W: Weight"))]
pub enum Layer<W: Weight = f64> {
    Diagonal(DiagonalLayer<W>),
    Rotation(RotationLayer<W>),
    Phase(PhaseLayer<W>),
    G(GLayer<W>),
}

pub fn rotation_gate(theta: Complex64) -> Gate2 {
    let (c, s) = (theta.cos(), theta.sin());
    [[c, -s], [s, c]]
}

pub fn phase_gate(phi: Complex64) -> Gate2 {
    let z = Complex64::new(0.0, 0.0);
    let e = (Complex64::i() * phi).exp();
    [[e, z], [z, e.inv()]]
}

pub fn g_gate(theta: Complex64) -> Gate2 {
    let e = (Complex64::i() * theta).exp();
    let d = (1.0 + e) * 0.5;
    let o = (1.0 - e) * 0.5;
    [[d, o], [o, d]]
}

/// Ordered layers acting on a register with one qubit per lattice site.
/// `layers[0]` acts first.
///
/// Real parameters give a unitary circuit. Complex parameters are accepted
/// everywhere; they describe the analytic continuation of the amplitude.
#[derive(Debug, Clone, PartialEq)]
pub struct CircuitProgram<W: Weight = f64> {
    lattice: Lattice,
    layers: Vec<Layer<W>>,
}

impl<W: Weight> CircuitProgram<W> {
    pub fn new(lattice: Lattice, layers: Vec<Layer<W>>) -> Result<Self> {
        let n = lattice.vertex_count();
        for layer in &layers {
            match layer {
                Layer::Diagonal(d) => {
                    check_len("diagonal couplings", lattice.edge_count(), d.couplings.len())?;
                    check_len("diagonal fields", n, d.fields.len())?;
                    if !d.offsets.is_empty() {
                        check_len("diagonal offsets", n, d.offsets.len())?;
                    }
                }
                Layer::Rotation(r) => check_len("rotation angles", n, r.theta.len())?,
                Layer::Phase(p) => check_len("phase angles", n, p.phi.len())?,
                Layer::G(g) => check_len("G angles", n, g.theta.len())?,
            }
        }
        Ok(Self { lattice, layers })
    }

    pub fn empty(lattice: Lattice) -> Self {
        Self {
            lattice,
            layers: Vec::new(),
        }
    }

    pub fn qubits(&self) -> usize {
        self.lattice.vertex_count()
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn layers(&self) -> &[Layer<W>] {
        &self.layers
    }

    /// Number of classical time slices: one plus the number of
    /// basis-changing (rotation or G) layers.
    pub fn time_slices(&self) -> usize {
        1 + self
            .layers
            .iter()
            .filter(|l| matches!(l, Layer::Rotation(_) | Layer::G(_)))
            .count()
    }

    /// Applies every layer to `state` in order.
    pub fn apply(&self, state: &mut QuantumState) -> Result<()> {
        check_len("state qubits", self.qubits(), state.qubits())?;
        for layer in &self.layers {
            apply_layer(&self.lattice, layer, state)?;
        }
        Ok(())
    }
}

impl CircuitProgram<f64> {
    pub fn to_complex(&self) -> CircuitProgram<Complex64> {
        let c = |v: &Vec<f64>| v.iter().map(|&x| Complex64::new(x, 0.0)).collect::<Vec<_>>();
        let layers = self
            .layers
            .iter()
            .map(|l| match l {
                Layer::Diagonal(d) => Layer::Diagonal(DiagonalLayer {
                    alpha: d.alpha.into(),
                    couplings: c(&d.couplings),
                    fields: c(&d.fields),
                    offsets: c(&d.offsets),
                }),
                Layer::Rotation(r) => Layer::Rotation(RotationLayer { theta: c(&r.theta) }),
                Layer::Phase(p) => Layer::Phase(PhaseLayer { phi: c(&p.phi) }),
                Layer::G(g) => Layer::G(GLayer { theta: c(&g.theta) }),
            })
            .collect();
        CircuitProgram {
            lattice: self.lattice.clone(),
            layers,
        }
    }

    /// Reads a program file. The lattice comes either from an inline
    /// `"lattice"` entry or from the model file named by `"model"`, resolved
    /// relative to the program file.
    pub fn read(path: &Path) -> Result<Self> {
        #[derive(Deserialize)]
        struct ProgramFile {
            #[serde(default)]
            model: Option<String>,
            #[serde(default)]
            lattice: Option<Lattice>,
            layers: Vec<Layer<f64>>,
        }
        #[derive(Deserialize)]
        struct LatticeOnly {
            lattice: Lattice,
        }
        let file: ProgramFile = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        let lattice = match (file.lattice, file.model) {
            (Some(l), _) => l,
            (None, Some(m)) => {
                let base = path.parent().unwrap_or(Path::new("."));
                let text = std::fs::read_to_string(base.join(m))?;
                serde_json::from_str::<LatticeOnly>(&text)?.lattice
            }
            (None, None) => {
                return Err(crate::Error::InvalidArgument(
                    "program file needs a \"lattice\" or a \"model\" entry".into(),
                ))
            }
        };
        Self::new(lattice, file.layers)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({ "lattice": self.lattice, "layers": self.layers })
    }
}

fn apply_layer<W: Weight>(lattice: &Lattice, layer: &Layer<W>, state: &mut QuantumState) -> Result<()> {
    let per_site = |angles: &[W], gate: fn(Complex64) -> Gate2, state: &mut QuantumState| -> Result<()> {
        for (k, &a) in angles.iter().enumerate() {
            state.apply_single(k, &gate(a.into()))?;
        }
        Ok(())
    };
    match layer {
        Layer::Diagonal(d) => {
            let alpha: Complex64 = d.alpha.into();
            let kappa: Complex64 = d.offsets.iter().map(|&x| x.into()).sum();
            let fields: Vec<Complex64> = d.fields.iter().map(|&x| x.into()).collect();
            let couplings: Vec<Complex64> = d.couplings.iter().map(|&x| x.into()).collect();
            let edges = lattice.edges();
            state.apply_diagonal(|b| {
                let b = b as u64;
                let mut e = kappa;
                for (k, h) in fields.iter().enumerate() {
                    e += h * spin_of(b, k) as f64;
                }
                for (&(i, j), jij) in edges.iter().zip(&couplings) {
                    e += jij * (spin_of(b, i) * spin_of(b, j)) as f64;
                }
                (Complex64::i() * alpha * e).exp()
            });
            Ok(())
        }
        Layer::Rotation(r) => per_site(&r.theta, rotation_gate, state),
        Layer::Phase(p) => per_site(&p.phi, phase_gate, state),
        Layer::G(g) => per_site(&g.theta, g_gate, state),
    }
}

/// Builder for the standard layered program on `lattice`:
/// a diagonal layer for slice 1, then for each later slice
/// `P(π/4)`, the rotation, `P(−π/4)` and the slice's diagonal layer.
pub fn layered_program<W: Weight>(
    lattice: &Lattice,
    alpha: W,
    slices: &[(Vec<W>, Vec<W>)],
    thetas: &[Vec<W>],
) -> Result<CircuitProgram<W>> {
    let n = lattice.vertex_count();
    if slices.is_empty() {
        return Err(crate::Error::InvalidArgument("layered program needs at least one slice".into()));
    }
    check_len("rotation steps", slices.len() - 1, thetas.len())?;
    let quarter = W::from(std::f64::consts::FRAC_PI_4);
    let diag = |(j, h): &(Vec<W>, Vec<W>)| {
        Layer::Diagonal(DiagonalLayer {
            alpha,
            couplings: j.clone(),
            fields: h.clone(),
            offsets: Vec::new(),
        })
    };
    let mut layers = vec![diag(&slices[0])];
    for (slice, theta) in slices[1..].iter().zip(thetas) {
        layers.push(Layer::Phase(PhaseLayer { phi: vec![quarter; n] }));
        layers.push(Layer::Rotation(RotationLayer { theta: theta.clone() }));
        layers.push(Layer::Phase(PhaseLayer { phi: vec![-quarter; n] }));
        layers.push(diag(slice));
    }
    CircuitProgram::new(lattice.clone(), layers)
}
