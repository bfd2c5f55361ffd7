use std::ops::{Add, Div, Mul, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Arithmetic needed by barycentric evaluation.
pub trait Field: Clone + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Div<Output = Self> {
    fn one_like(&self) -> Self;
    fn is_zero(&self) -> bool;
}

impl Field for Complex64 {
    fn one_like(&self) -> Self {
        Complex64::new(1.0, 0.0)
    }

    fn is_zero(&self) -> bool {
        *self == Complex64::new(0.0, 0.0)
    }
}

/// Complex fixed point: `(re + i·im) / 2^bits`, truncating toward zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixedComplex {
    re: BigInt,
    im: BigInt,
    bits: u32,
}

impl FixedComplex {
    pub fn zero(bits: u32) -> Self {
        Self { re: BigInt::from(0), im: BigInt::from(0), bits }
    }

    /// `num / den` exactly rounded toward zero.
    pub fn from_ratio(num: &BigInt, den: &BigInt, bits: u32) -> Self {
        Self { re: (num << bits) / den, im: BigInt::from(0), bits }
    }

    /// Nearest representable value to a double, exact for dyadic inputs.
    pub fn from_complex(z: Complex64, bits: u32) -> Self {
        let conv = |x: f64| {
            let (mant, exp) = frexp(x);
            let m = BigInt::from((mant * (1u64 << 53) as f64) as i64);
            let shift = exp - 53 + bits as i32;
            if shift >= 0 {
                m << shift as u32
            } else {
                m >> (-shift) as u32
            }
        };
        Self { re: conv(z.re), im: conv(z.im), bits }
    }

    pub fn new(re: BigInt, im: BigInt, bits: u32) -> Self {
        Self { re, im, bits }
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn to_complex(&self) -> Complex64 {
        let conv = |x: &BigInt| {
            let len = x.bits() as i64;
            let drop = (len - 60).max(0) as u32;
            let top: i64 = (x >> drop).try_into().unwrap_or(0);
            top as f64 * 2f64.powi(drop as i32 - self.bits as i32)
        };
        Complex64::new(conv(&self.re), conv(&self.im))
    }

    pub fn conj(&self) -> Self {
        Self { re: self.re.clone(), im: -self.im.clone(), bits: self.bits }
    }

    fn check(&self, other: &Self) {
        assert_eq!(self.bits, other.bits, "fixed-point precision mismatch");
    }
}

fn frexp(x: f64) -> (f64, i32) {
    if x == 0.0 || !x.is_finite() {
        return (0.0, 0);
    }
    let e = x.abs().log2().floor() as i32 + 1;
    let m = x / 2f64.powi(e);
    // Correct for rounding in log2 so that 0.5 ≤ |m| < 1.
    if m.abs() >= 1.0 {
        (m / 2.0, e + 1)
    } else if m.abs() < 0.5 {
        (m * 2.0, e - 1)
    } else {
        (m, e)
    }
}

impl Add for FixedComplex {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        self.check(&o);
        Self { re: self.re + o.re, im: self.im + o.im, bits: self.bits }
    }
}

impl Sub for FixedComplex {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self.check(&o);
        Self { re: self.re - o.re, im: self.im - o.im, bits: self.bits }
    }
}

impl Mul for FixedComplex {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        self.check(&o);
        let re = (&self.re * &o.re - &self.im * &o.im) >> self.bits;
        let im = (&self.re * &o.im + &self.im * &o.re) >> self.bits;
        Self { re, im, bits: self.bits }
    }
}

impl Div for FixedComplex {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        self.check(&o);
        let den = &o.re * &o.re + &o.im * &o.im;
        let re = ((&self.re * &o.re + &self.im * &o.im) << self.bits) / &den;
        let im = ((&self.im * &o.re - &self.re * &o.im) << self.bits) / &den;
        Self { re, im, bits: self.bits }
    }
}

impl Field for FixedComplex {
    fn one_like(&self) -> Self {
        Self { re: BigInt::from(1) << self.bits, im: BigInt::from(0), bits: self.bits }
    }

    fn is_zero(&self) -> bool {
        self.re == BigInt::from(0) && self.im == BigInt::from(0)
    }
}

/// Interpolating polynomial through `(z_j, value_j)`, evaluated at `target`
/// in barycentric form `ℓ(z) Σ_j w_j y_j / (z − z_j)`.
pub fn lagrange_estimate<F: Field>(nodes: &[(F, F)], target: F) -> Result<F> {
    let Some(first) = nodes.first() else {
        return Err(Error::InvalidArgument("no interpolation nodes".into()));
    };
    let one = first.0.one_like();
    let mut weights = Vec::with_capacity(nodes.len());
    for (j, (zj, _)) in nodes.iter().enumerate() {
        let mut prod = one.clone();
        for (k, (zk, _)) in nodes.iter().enumerate() {
            if k != j {
                let d = zj.clone() - zk.clone();
                if d.is_zero() {
                    return Err(Error::InvalidArgument(format!("duplicate interpolation nodes {j} and {k}")));
                }
                prod = prod * d;
            }
        }
        weights.push(one.clone() / prod);
    }
    let mut ell = one.clone();
    let mut sum = one.clone() - one.clone();
    for ((zj, yj), wj) in nodes.iter().zip(weights) {
        let d = target.clone() - zj.clone();
        if d.is_zero() {
            return Ok(yj.clone());
        }
        ell = ell * d.clone();
        sum = sum + wj * yj.clone() / d;
    }
    Ok(ell * sum)
}
