use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Shape information attached to a [`Lattice`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Geometry {
    /// Hypercubic grid. Vertex `(x0, x1, ...)` has index `x0 + d0*(x1 + d1*(...))`.
    Grid { dims: Vec<usize>, periodic: Vec<bool> },
    Irregular,
}

/// Undirected simple graph with an optional grid geometry tag.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "LatticeSpec", into = "LatticeSpec")]
pub struct Lattice {
    vertex_count: usize,
    edges: Vec<(usize, usize)>,
    geometry: Geometry,
}

impl Lattice {
    /// Nearest-neighbour grid. Edges are listed by vertex index, then by axis,
    /// each pointing in the `+1` direction. A periodic axis contributes wrap
    /// edges only when its extent exceeds 2, so the edge set stays simple.
    pub fn grid(dims: &[usize], periodic: &[bool]) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::InvalidArgument(format!("grid dims {dims:?} must be non-empty and positive")));
        }
        crate::error::check_len("periodic flags", dims.len(), periodic.len())?;
        let n: usize = dims.iter().product();
        let mut edges = Vec::new();
        for v in 0..n {
            let coords = coords_of(v, dims);
            for (axis, (&d, &p)) in dims.iter().zip(periodic).enumerate() {
                let x = coords[axis];
                let nx = if x + 1 < d {
                    x + 1
                } else if p && d > 2 {
                    0
                } else {
                    continue;
                };
                let mut c = coords.clone();
                c[axis] = nx;
                edges.push((v, index_of(&c, dims)));
            }
        }
        Ok(Self {
            vertex_count: n,
            edges,
            geometry: Geometry::Grid {
                dims: dims.to_vec(),
                periodic: periodic.to_vec(),
            },
        })
    }

    /// Open or periodic chain of `n` sites.
    pub fn chain(n: usize, periodic: bool) -> Result<Self> {
        Self::grid(&[n], &[periodic])
    }

    pub fn irregular(vertex_count: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        let mut seen = HashSet::new();
        for &(i, j) in &edges {
            if i >= vertex_count || j >= vertex_count {
                return Err(Error::InvalidArgument(format!(
                    "edge ({i},{j}) out of range for {vertex_count} vertices"
                )));
            }
            if i == j {
                return Err(Error::InvalidArgument(format!("self-loop at vertex {i}")));
            }
            if !seen.insert((i.min(j), i.max(j))) {
                return Err(Error::InvalidArgument(format!("duplicate edge ({i},{j})")));
            }
        }
        Ok(Self {
            vertex_count,
            edges,
            geometry: Geometry::Irregular,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    /// Map from an unordered vertex pair to its edge index.
    pub fn edge_index(&self) -> HashMap<(usize, usize), usize> {
        self.edges
            .iter()
            .enumerate()
            .map(|(k, &(i, j))| ((i.min(j), i.max(j)), k))
            .collect()
    }

    /// Per-vertex list of `(neighbour, edge index)`.
    pub fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.vertex_count];
        for (k, &(i, j)) in self.edges.iter().enumerate() {
            adj[i].push((j, k));
            adj[j].push((i, k));
        }
        adj
    }
}

pub(crate) fn coords_of(mut v: usize, dims: &[usize]) -> Vec<usize> {
    dims.iter()
        .map(|&d| {
            let x = v % d;
            v /= d;
            x
        })
        .collect()
}

pub(crate) fn index_of(coords: &[usize], dims: &[usize]) -> usize {
    coords
        .iter()
        .zip(dims)
        .rev()
        .fold(0, |acc, (&x, &d)| acc * d + x)
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum LatticeSpec {
    Grid {
        dims: Vec<usize>,
        #[serde(default)]
        periodic: Option<Vec<bool>>,
    },
    Irregular {
        irregular: IrregularSpec,
    },
}

#[derive(Serialize, Deserialize)]
struct IrregularSpec {
    vertices: usize,
    edges: Vec<[usize; 2]>,
}

impl TryFrom<LatticeSpec> for Lattice {
    type Error = Error;

    fn try_from(spec: LatticeSpec) -> Result<Self> {
        match spec {
            LatticeSpec::Grid { dims, periodic } => {
                let periodic = periodic.unwrap_or_else(|| vec![false; dims.len()]);
                Lattice::grid(&dims, &periodic)
            }
            LatticeSpec::Irregular { irregular } => Lattice::irregular(
                irregular.vertices,
                irregular.edges.into_iter().map(|[i, j]| (i, j)).collect(),
            ),
        }
    }
}

impl From<Lattice> for LatticeSpec {
    fn from(l: Lattice) -> Self {
        match l.geometry {
            Geometry::Grid { dims, periodic } => LatticeSpec::Grid {
                dims,
                periodic: Some(periodic),
            },
            Geometry::Irregular => LatticeSpec::Irregular {
                irregular: IrregularSpec {
                    vertices: l.vertex_count,
                    edges: l.edges.into_iter().map(|(i, j)| [i, j]).collect(),
                },
            },
        }
    }
}
