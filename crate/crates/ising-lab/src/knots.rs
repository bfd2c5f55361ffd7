//! Potts partition functions on signed graphs at the imaginary temperatures
//! where they are link invariants, with a bundled catalog of six knots and
//! links.

use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};

/// Largest `q^{|V|}` [`potts_partition`] will enumerate.
pub const ENUMERATION_CAP: u64 = 10_000_000;

/// Graph with `±` edge signs. Parallel edges are allowed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawGraph", into = "RawGraph")]
pub struct SignedGraph {
    name: String,
    vertices: usize,
    edges: Vec<(usize, usize)>,
    signs: Vec<i8>,
}

#[derive(Serialize, Deserialize)]
struct RawGraph {
    #[serde(default)]
    name: String,
    vertices: usize,
    edges: Vec<[usize; 2]>,
    signs: Vec<i8>,
}

impl TryFrom<RawGraph> for SignedGraph {
    type Error = Error;

    fn try_from(r: RawGraph) -> Result<Self> {
        SignedGraph::new(r.name, r.vertices, r.edges.into_iter().map(|[a, b]| (a, b)).collect(), r.signs)
    }
}

impl From<SignedGraph> for RawGraph {
    fn from(g: SignedGraph) -> Self {
        RawGraph {
            name: g.name,
            vertices: g.vertices,
            edges: g.edges.into_iter().map(|(a, b)| [a, b]).collect(),
            signs: g.signs,
        }
    }
}

impl SignedGraph {
    pub fn new(name: impl Into<String>, vertices: usize, edges: Vec<(usize, usize)>, signs: Vec<i8>) -> Result<Self> {
        check_len("edge signs", edges.len(), signs.len())?;
        for &(a, b) in &edges {
            if a >= vertices || b >= vertices {
                return Err(Error::InvalidArgument(format!("edge ({a},{b}) out of range for {vertices} vertices")));
            }
            if a == b {
                return Err(Error::InvalidArgument(format!("self-loop at vertex {a}")));
            }
        }
        if let Some(s) = signs.iter().find(|&&s| s != 1 && s != -1) {
            return Err(Error::InvalidArgument(format!("edge sign {s} is not ±1")));
        }
        Ok(Self {
            name: name.into(),
            vertices,
            edges,
            signs,
        })
    }

    pub fn read(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    /// Appends an edge, for building variants of catalog graphs.
    pub fn with_edge(mut self, a: usize, b: usize, sign: i8) -> Result<Self> {
        self.edges.push((a, b));
        self.signs.push(sign);
        Self::new(self.name, self.vertices, self.edges, self.signs)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PottsParams {
    pub q: u32,
    pub beta: Complex64,
}

/// `β = cosh⁻¹((q − 2)/2)` on the principal branch: `i2π/3`, `iπ/2`, `iπ/3`
/// for `q = 1, 2, 3`.
pub fn invariant_beta(q: u32) -> Complex64 {
    Complex64::new((q as f64 - 2.0) / 2.0, 0.0).acosh()
}

/// `Σ_σ Π_edges exp(±β δ(σ_a, σ_b))` over all `q^{|V|}` assignments.
pub fn potts_partition(graph: &SignedGraph, params: PottsParams) -> Result<Complex64> {
    if params.q == 0 {
        return Err(Error::InvalidArgument("q must be at least 1".into()));
    }
    let q = params.q as u64;
    let total = q.checked_pow(graph.vertices as u32).filter(|&t| t <= ENUMERATION_CAP);
    let Some(total) = total else {
        return Err(Error::CapExceeded {
            what: "Potts enumeration q^|V|",
            size: (params.q as f64).powi(graph.vertices as i32).min(usize::MAX as f64) as usize,
            cap: ENUMERATION_CAP as usize,
        });
    };
    let weight = [(-params.beta).exp(), params.beta.exp()];
    const CHUNK: u64 = 1 << 14;
    let parts: Vec<Complex64> = (0..total.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let start = c * CHUNK;
            let mut digits = vec![0u64; graph.vertices];
            let mut rest = start;
            for d in digits.iter_mut() {
                *d = rest % q;
                rest /= q;
            }
            let mut acc = Complex64::new(0.0, 0.0);
            for _ in start..total.min(start + CHUNK) {
                let mut term = Complex64::new(1.0, 0.0);
                for (&(a, b), &s) in graph.edges.iter().zip(&graph.signs) {
                    if digits[a] == digits[b] {
                        term *= weight[(s + 1) as usize / 2];
                    }
                }
                acc += term;
                for d in digits.iter_mut() {
                    *d += 1;
                    if *d < q {
                        break;
                    }
                    *d = 0;
                }
            }
            acc
        })
        .collect();
    Ok(parts.into_iter().sum())
}

const CATALOG: [(&str, &str); 6] = [
    ("3_1", include_str!("../data/knots/3_1.json")),
    ("4_1", include_str!("../data/knots/4_1.json")),
    ("6_2", include_str!("../data/knots/6_2.json")),
    ("5^2_1", include_str!("../data/knots/5_2_1.json")),
    ("2^2_1", include_str!("../data/knots/2_2_1.json")),
    ("6^3_2", include_str!("../data/knots/6_3_2.json")),
];

/// Catalog names, in table order.
pub fn catalog_names() -> Vec<&'static str> {
    CATALOG.iter().map(|(n, _)| *n).collect()
}

/// Bundled signed graph for `name`. Accepts `5^2_1` or `5_2_1` spellings.
pub fn catalog_graph(name: &str) -> Result<SignedGraph> {
    let canon = name.replace('^', "_");
    CATALOG
        .iter()
        .find(|(n, _)| n.replace('^', "_") == canon)
        .map(|(_, json)| serde_json::from_str(json).map_err(Error::from))
        .unwrap_or_else(|| Err(Error::UnknownName(format!("knot {name:?}; known: {}", catalog_names().join(", ")))))
}

/// `Z_L` of the catalog graph at `β = invariant_beta(q)`.
pub fn knot_invariant(name: &str, q: u32) -> Result<Complex64> {
    let g = catalog_graph(name)?;
    potts_partition(&g, PottsParams { q, beta: invariant_beta(q) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() < 1e-9 * b.norm().max(1.0)
    }

    #[test]
    fn invariant_temperatures() {
        for (q, b) in [(1, 2.0 * PI / 3.0), (2, PI / 2.0), (3, PI / 3.0)] {
            assert!(close(invariant_beta(q), Complex64::new(0.0, b)));
        }
        for q in 1..8 {
            assert!((invariant_beta(q).cosh() - Complex64::new((q as f64 - 2.0) / 2.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn small_sums() {
        let edge = SignedGraph::new("e", 2, vec![(0, 1)], vec![1]).unwrap();
        let beta = 0.7;
        let z = potts_partition(&edge, PottsParams { q: 2, beta: Complex64::new(beta, 0.0) }).unwrap();
        assert!(close(z, Complex64::new(2.0 * beta.exp() + 2.0, 0.0)));

        let g = SignedGraph::new("g", 3, vec![(0, 1), (1, 2), (0, 1)], vec![1, -1, 1]).unwrap();
        let b = Complex64::new(0.3, 0.4);
        assert!(close(potts_partition(&g, PottsParams { q: 1, beta: b }).unwrap(), b.exp()));
        let z0 = potts_partition(&g, PottsParams { q: 3, beta: Complex64::new(0.0, 0.0) }).unwrap();
        assert!(close(z0, Complex64::new(27.0, 0.0)));
    }

    #[test]
    fn catalog_loads_and_rejects_unknown() {
        for name in catalog_names() {
            assert_eq!(catalog_graph(name).unwrap().name(), name);
        }
        assert!(catalog_graph("5_2_1").is_ok());
        assert!(matches!(catalog_graph("8_19"), Err(Error::UnknownName(_))));
    }

    #[test]
    fn enumeration_cap() {
        let g = SignedGraph::new("big", 15, vec![], vec![]).unwrap();
        assert!(matches!(
            potts_partition(&g, PottsParams { q: 3, beta: Complex64::new(0.0, 0.0) }),
            Err(Error::CapExceeded { .. })
        ));
    }
}
