use std::collections::BTreeMap;
use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::lattice::Lattice;
use crate::error::{check_len, Error, Result};

/// Scalar type usable as a coupling or field: `f64` or `Complex64`.
pub trait Weight:
    Copy
    + Debug
    + PartialEq
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + From<f64>
    + Into<Complex64>
    + Serialize
    + DeserializeOwned
    + 'static
{
}

impl<T> Weight for T where
    T: Copy
        + Debug
        + PartialEq
        + Send
        + Sync
        + Add<Output = T>
        + Sub<Output = T>
        + Mul<Output = T>
        + Neg<Output = T>
        + From<f64>
        + Into<Complex64>
        + Serialize
        + DeserializeOwned
        + 'static
{
}

/// `H(σ) = −Σ h_i σ_i − Σ J_ij σ_i σ_j` on a lattice.
///
/// Real models use `W = f64`; the circuit dualities produce complex couplings
/// (`W = Complex64`), which serialize as `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawModel<W>", into = "RawModel<W>")]
#[serde(bound(serialize = "W: Weight", deserialize = "W: Weight"))]
pub struct IsingModel<W: Weight = f64> {
    lattice: Lattice,
    couplings: Vec<W>,
    fields: Vec<W>,
}

impl<W: Weight> IsingModel<W> {
    pub fn new(lattice: Lattice, couplings: Vec<W>, fields: Vec<W>) -> Result<Self> {
        check_len("couplings", lattice.edge_count(), couplings.len())?;
        check_len("fields", lattice.vertex_count(), fields.len())?;
        Ok(Self {
            lattice,
            couplings,
            fields,
        })
    }

    pub fn uniform(lattice: Lattice, j: W, h: W) -> Self {
        let couplings = vec![j; lattice.edge_count()];
        let fields = vec![h; lattice.vertex_count()];
        Self {
            lattice,
            couplings,
            fields,
        }
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn couplings(&self) -> &[W] {
        &self.couplings
    }

    pub fn fields(&self) -> &[W] {
        &self.fields
    }

    pub fn site_count(&self) -> usize {
        self.lattice.vertex_count()
    }

    pub fn energy(&self, config: &SpinConfiguration) -> Result<W> {
        check_len("spin configuration", self.site_count(), config.len())?;
        Ok(self.energy_bits(config.bits()))
    }

    pub(crate) fn energy_bits(&self, bits: u64) -> W {
        let s = |i: usize| spin_of(bits, i) as f64;
        let mut e = W::from(0.0);
        for (i, &h) in self.fields.iter().enumerate() {
            e = e - h * W::from(s(i));
        }
        for (&(i, j), &jij) in self.lattice.edges().iter().zip(&self.couplings) {
            e = e - jij * W::from(s(i) * s(j));
        }
        e
    }

    /// Same lattice with every coupling and field mapped through `f`.
    pub fn map<V: Weight>(&self, f: impl Fn(W) -> V) -> IsingModel<V> {
        IsingModel {
            lattice: self.lattice.clone(),
            couplings: self.couplings.iter().map(|&x| f(x)).collect(),
            fields: self.fields.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn to_complex(&self) -> IsingModel<Complex64> {
        self.map(Into::into)
    }
}

impl IsingModel<f64> {
    /// Couplings and fields as exact integers, if they all are.
    pub fn integer_weights(&self) -> Result<(Vec<i64>, Vec<i64>)> {
        let conv = |x: f64, what: &str| -> Result<i64> {
            if x.fract() == 0.0 && x.abs() < (1u64 << 52) as f64 {
                Ok(x as i64)
            } else {
                Err(Error::InvalidArgument(format!("{what} {x} is not an integer")))
            }
        };
        let j = self
            .couplings
            .iter()
            .map(|&x| conv(x, "coupling"))
            .collect::<Result<Vec<_>>>()?;
        let h = self
            .fields
            .iter()
            .map(|&x| conv(x, "field"))
            .collect::<Result<Vec<_>>>()?;
        Ok((j, h))
    }
}

#[derive(Serialize, Deserialize)]
#[serde(bound(serialize = "W: Weight", deserialize = "W: Weight"))]
struct RawModel<W: Weight> {
    lattice: Lattice,
    couplings: Vec<W>,
    fields: Vec<W>,
}

impl<W: Weight> TryFrom<RawModel<W>> for IsingModel<W> {
    type Error = Error;
    fn try_from(r: RawModel<W>) -> Result<Self> {
        IsingModel::new(r.lattice, r.couplings, r.fields)
    }
}

impl<W: Weight> From<IsingModel<W>> for RawModel<W> {
    fn from(m: IsingModel<W>) -> Self {
        RawModel {
            lattice: m.lattice,
            couplings: m.couplings,
            fields: m.fields,
        }
    }
}

/// σ value of bit `i`: bit 0 ↔ +1, bit 1 ↔ −1.
#[inline]
pub(crate) fn spin_of(bits: u64, i: usize) -> i8 {
    1 - 2 * ((bits >> i) & 1) as i8
}

/// Bit-packed spins for up to 64 sites; bit `i` is site `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpinConfiguration {
    bits: u64,
    len: usize,
}

impl SpinConfiguration {
    pub const MAX_SITES: usize = 64;

    pub fn from_bits(bits: u64, len: usize) -> Result<Self> {
        if len > Self::MAX_SITES {
            return Err(Error::CapExceeded {
                what: "spin configuration",
                size: len,
                cap: Self::MAX_SITES,
            });
        }
        let mask = if len == 64 { u64::MAX } else { (1u64 << len) - 1 };
        if bits & !mask != 0 {
            return Err(Error::InvalidArgument(format!("bits {bits:#x} exceed length {len}")));
        }
        Ok(Self { bits, len })
    }

    pub fn all_up(len: usize) -> Result<Self> {
        Self::from_bits(0, len)
    }

    pub fn from_spins(spins: &[i8]) -> Result<Self> {
        let mut bits = 0u64;
        for (i, &s) in spins.iter().enumerate() {
            match s {
                1 => {}
                -1 => bits |= 1 << i,
                _ => return Err(Error::InvalidArgument(format!("spin {s} at site {i} is not ±1"))),
            }
        }
        Self::from_bits(bits, spins.len())
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn spin(&self, i: usize) -> i8 {
        spin_of(self.bits, i)
    }

    pub fn spins(&self) -> Vec<i8> {
        (0..self.len).map(|i| self.spin(i)).collect()
    }

    pub fn flipped(&self) -> Self {
        let mask = if self.len == 64 { u64::MAX } else { (1u64 << self.len) - 1 };
        Self {
            bits: !self.bits & mask,
            len: self.len,
        }
    }

    /// Sum of spins divided by the site count.
    pub fn mean_magnetization(&self) -> f64 {
        if self.len == 0 {
            return 0.0;
        }
        let down = self.bits.count_ones() as f64;
        (self.len as f64 - 2.0 * down) / self.len as f64
    }
}

/// Spins held fixed while the rest fluctuate.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PinnedSet {
    pins: BTreeMap<usize, i8>,
}

impl PinnedSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn pin(&mut self, site: usize, spin: i8) -> Result<()> {
        if spin != 1 && spin != -1 {
            return Err(Error::InvalidArgument(format!("pinned spin {spin} is not ±1")));
        }
        if self.pins.insert(site, spin).is_some() {
            return Err(Error::InvalidArgument(format!("site {site} pinned twice")));
        }
        Ok(())
    }

    pub fn with(mut self, site: usize, spin: i8) -> Result<Self> {
        self.pin(site, spin)?;
        Ok(self)
    }

    pub fn get(&self, site: usize) -> Option<i8> {
        self.pins.get(&site).copied()
    }

    pub fn contains(&self, site: usize) -> bool {
        self.pins.contains_key(&site)
    }

    pub fn len(&self) -> usize {
        self.pins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pins.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, i8)> + '_ {
        self.pins.iter().map(|(&k, &v)| (k, v))
    }

    /// Deletes pinned sites and folds `J·σ_pinned` into neighbouring fields.
    /// Returns the reduced model and, per reduced site, its original index.
    /// The constant energy of pinned-only terms is dropped.
    pub fn reduce<W: Weight>(&self, model: &IsingModel<W>) -> Result<(IsingModel<W>, Vec<usize>)> {
        let n = model.site_count();
        if let Some((&s, _)) = self.pins.iter().find(|(&s, _)| s >= n) {
            return Err(Error::InvalidArgument(format!("pinned site {s} out of range")));
        }
        let keep: Vec<usize> = (0..n).filter(|i| !self.contains(*i)).collect();
        let mut new_index = vec![usize::MAX; n];
        for (k, &i) in keep.iter().enumerate() {
            new_index[i] = k;
        }
        let mut fields: Vec<W> = keep.iter().map(|&i| model.fields()[i]).collect();
        let mut edges = Vec::new();
        let mut couplings = Vec::new();
        for (&(i, j), &jij) in model.lattice().edges().iter().zip(model.couplings()) {
            match (self.get(i), self.get(j)) {
                (None, None) => {
                    edges.push((new_index[i], new_index[j]));
                    couplings.push(jij);
                }
                (None, Some(s)) => fields[new_index[i]] = fields[new_index[i]] + jij * W::from(s as f64),
                (Some(s), None) => fields[new_index[j]] = fields[new_index[j]] + jij * W::from(s as f64),
                (Some(_), Some(_)) => {}
            }
        }
        let lattice = Lattice::irregular(keep.len(), edges)?;
        Ok((IsingModel::new(lattice, couplings, fields)?, keep))
    }
}
