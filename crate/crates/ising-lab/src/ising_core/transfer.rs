use num_complex::Complex64;

use super::lattice::Geometry;
use super::model::{IsingModel, Weight};
use crate::error::{Error, Result};

struct Strip {
    width: usize,
    length: usize,
    field: Vec<Vec<Complex64>>,
    vert: Vec<Vec<Complex64>>,
    left: Vec<Vec<Complex64>>,
    wrap: Vec<Complex64>,
    close: Vec<Complex64>,
}

fn sigma(bits: usize, p: usize) -> f64 {
    if (bits >> p) & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn build_strip<W: Weight>(model: &IsingModel<W>, cap: usize) -> Result<Strip> {
    let (dims, periodic) = match model.lattice().geometry() {
        Geometry::Grid { dims, periodic } if dims.len() <= 2 => (dims.clone(), periodic.clone()),
        Geometry::Grid { dims, .. } => {
            return Err(Error::Unsupported(format!(
                "transfer matrix needs a 1D or 2D grid, got {} axes",
                dims.len()
            )))
        }
        Geometry::Irregular => {
            return Err(Error::Unsupported("transfer matrix requested on an irregular lattice".into()))
        }
    };
    let (d0, p0) = (dims[0], periodic[0]);
    let (d1, p1) = (dims.get(1).copied().unwrap_or(1), periodic.get(1).copied().unwrap_or(false));
    let row_axis0 = d0 <= d1;
    let (width, length, row_periodic, long_periodic) = if row_axis0 { (d0, d1, p0, p1) } else { (d1, d0, p1, p0) };
    if width > cap {
        return Err(Error::CapExceeded {
            what: "transfer-matrix width",
            size: width,
            cap,
        });
    }
    let site = |p: usize, t: usize| if row_axis0 { p + d0 * t } else { t + d0 * p };
    let index = model.lattice().edge_index();
    let coupling = |u: usize, v: usize| -> Complex64 {
        index
            .get(&(u.min(v), u.max(v)))
            .map(|&k| model.couplings()[k].into())
            .unwrap_or_default()
    };
    let zero = Complex64::new(0.0, 0.0);
    let mut field = vec![vec![zero; length]; width];
    let mut vert = vec![vec![zero; length]; width];
    let mut left = vec![vec![zero; length]; width];
    let mut wrap = vec![zero; length];
    let mut close = vec![zero; width];
    for t in 0..length {
        for p in 0..width {
            field[p][t] = model.fields()[site(p, t)].into();
            if t >= 1 {
                vert[p][t] = coupling(site(p, t), site(p, t - 1));
            }
            if p >= 1 {
                left[p][t] = coupling(site(p, t), site(p - 1, t));
            }
        }
        if row_periodic && width > 2 {
            wrap[t] = coupling(site(width - 1, t), site(0, t));
        }
    }
    if long_periodic && length > 2 {
        for (p, c) in close.iter_mut().enumerate() {
            *c = coupling(site(p, length - 1), site(p, 0));
        }
    }
    Ok(Strip {
        width,
        length,
        field,
        vert,
        left,
        wrap,
        close,
    })
}

impl Strip {
    fn row_energy(&self, s: usize, t: usize) -> Complex64 {
        let mut e = Complex64::new(0.0, 0.0);
        for p in 0..self.width {
            e -= self.field[p][t] * sigma(s, p);
            if p >= 1 {
                e -= self.left[p][t] * sigma(s, p) * sigma(s, p - 1);
            }
        }
        e - self.wrap[t] * sigma(s, self.width - 1) * sigma(s, 0)
    }

    /// Adds rows `1..length` to a row-0 boundary vector.
    fn sweep(&self, mut v: Vec<Complex64>, beta: Complex64) -> Vec<Complex64> {
        let w = self.width;
        let mut next = vec![Complex64::new(0.0, 0.0); v.len()];
        for t in 1..self.length {
            for p in 0..w {
                for (s_new, out) in next.iter_mut().enumerate() {
                    let sn = sigma(s_new, p);
                    let mut e_row = -self.field[p][t] * sn;
                    if p >= 1 {
                        e_row -= self.left[p][t] * sn * sigma(s_new, p - 1);
                    }
                    if p == w - 1 && w > 2 {
                        e_row -= self.wrap[t] * sn * sigma(s_new, 0);
                    }
                    let mut acc = Complex64::new(0.0, 0.0);
                    for old in 0..2usize {
                        let s_old = (s_new & !(1 << p)) | (old << p);
                        let so = if old == 0 { 1.0 } else { -1.0 };
                        let e = e_row - self.vert[p][t] * sn * so;
                        acc += v[s_old] * (-beta * e).exp();
                    }
                    *out = acc;
                }
                std::mem::swap(&mut v, &mut next);
            }
        }
        v
    }
}

pub(crate) fn partition_transfer<W: Weight>(model: &IsingModel<W>, beta: Complex64, cap: usize) -> Result<Complex64> {
    let strip = build_strip(model, cap)?;
    let states = 1usize << strip.width;
    let row0: Vec<Complex64> = (0..states).map(|s| (-beta * strip.row_energy(s, 0)).exp()).collect();
    let periodic = strip.close.iter().any(|c| *c != Complex64::new(0.0, 0.0));
    if !periodic {
        return Ok(strip.sweep(row0, beta).into_iter().sum());
    }
    let mut z = Complex64::new(0.0, 0.0);
    for r0 in 0..states {
        let mut v = vec![Complex64::new(0.0, 0.0); states];
        v[r0] = row0[r0];
        let end = strip.sweep(v, beta);
        for (s, val) in end.into_iter().enumerate() {
            let mut e = Complex64::new(0.0, 0.0);
            for p in 0..strip.width {
                e -= strip.close[p] * sigma(s, p) * sigma(r0, p);
            }
            z += val * (-beta * e).exp();
        }
    }
    Ok(z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ising_core::{partition_function, Lattice, Method};

    #[test]
    fn agrees_with_enumeration_on_small_grids() {
        let beta = Complex64::new(0.4, 0.3);
        for (dims, per) in [
            (vec![3, 4], vec![false, false]),
            (vec![4, 3], vec![true, false]),
            (vec![3, 3], vec![true, true]),
            (vec![5], vec![true]),
            (vec![2, 5], vec![true, true]),
        ] {
            let l = Lattice::grid(&dims, &per).unwrap();
            let n = l.edge_count();
            let couplings: Vec<f64> = (0..n).map(|k| 0.3 + 0.1 * k as f64).collect();
            let fields: Vec<f64> = (0..l.vertex_count()).map(|k| -0.2 + 0.05 * k as f64).collect();
            let m = IsingModel::new(l, couplings, fields).unwrap();
            let a = partition_function(&m, beta, Method::Enumerate).unwrap();
            let b = partition_function(&m, beta, Method::Transfer).unwrap();
            assert!((a - b).norm() <= 1e-12 * a.norm(), "{dims:?} {a} {b}");
        }
    }

    #[test]
    fn irregular_is_rejected() {
        let m = IsingModel::uniform(Lattice::irregular(2, vec![(0, 1)]).unwrap(), 1.0, 0.0);
        assert!(matches!(
            partition_function(&m, Complex64::new(1.0, 0.0), Method::Transfer),
            Err(Error::Unsupported(_))
        ));
    }
}
