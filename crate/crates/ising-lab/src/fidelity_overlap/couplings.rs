use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

/// Six complex couplings `(β₊, β₋, β′₊, β′₋, β, β′)` of the slab model with
/// the companions `ε, ε′`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CouplingVector {
    pub betas: [Complex64; 6],
    pub eps: f64,
    pub eps_prime: f64,
}

/// Positive root of `2ε/(2 − ε²) = tan(τh⊥)`.
///
/// The real transfer scalar needs `ε < 1`, which holds for `τh⊥ < arctan 2`.
pub fn epsilon_for(tau_h: f64) -> Result<f64> {
    let t = tau_h.tan();
    if !(tau_h > 0.0 && tau_h < 2f64.atan() && t.is_finite()) {
        return Err(Error::InvalidArgument(format!("τh⊥ = {tau_h} must lie in (0, arctan 2)")));
    }
    // ε²t + 2ε − 2t = 0; the stable form of (√(1 + 2t²) − 1)/t.
    Ok(2.0 * t / (1.0 + (1.0 + 2.0 * t * t).sqrt()))
}

/// `(β₊, β₋)` with `e^{−2β±} = ∓i(1 ± ε)`, principal logarithm. The product
/// of the two transfer matrices is then proportional to `e^{−iτh⊥σ^x}`.
fn time_pair(eps: f64) -> (Complex64, Complex64) {
    let i = Complex64::i();
    let plus = -0.5 * (-i * (1.0 + eps)).ln();
    let minus = -0.5 * (i * (1.0 - eps)).ln();
    (plus, minus)
}

/// `√((1 − ε²)/(ε⁴ + 4))`, so that
/// `e^{∓iτh⊥σ^x} = transfer_scalar(ε) · T(β₊)T(β₋)` with `T(β) = Σ e^{βσσ′}|σ⟩⟨σ′|`
/// for `e^{−2β±} = ∓i(1 ± ε)` and its conjugate respectively.
pub fn transfer_scalar(eps: f64) -> f64 {
    ((1.0 - eps * eps) / (eps.powi(4) + 4.0)).sqrt()
}

/// Couplings for the forward evolution `(τ, h⊥, J, T, L)` and the reversed
/// one `(τ′, h′⊥, J′, T′, L′)`.
///
/// Since `Ĥ₀ = −h⊥Σσ^x`, each forward step needs `e^{+iτh⊥σ^x}`: the forward
/// pair solves `e^{−2β±} = ±i(1 ± ε)` and the reversed pair, which undoes
/// `e^{+iτ′h′⊥σ^x}`, solves `e^{−2β′±} = ∓i(1 ± ε′)`. `β* = iJT/L²` and
/// `β′* = −iJ′T′/L′²`.
#[allow(clippy::too_many_arguments)]
pub fn beta_star(
    tau: f64,
    h_perp: f64,
    tau2: f64,
    h_perp2: f64,
    j: f64,
    j2: f64,
    total: f64,
    total2: f64,
    steps: usize,
    steps2: usize,
) -> Result<CouplingVector> {
    if steps == 0 || steps2 == 0 {
        return Err(Error::InvalidArgument("step counts must be positive".into()));
    }
    let eps = epsilon_for(tau * h_perp)?;
    let eps_prime = epsilon_for(tau2 * h_perp2)?;
    let (bp, bm) = time_pair(eps);
    let (cp, cm) = time_pair(eps_prime);
    let beta = Complex64::new(0.0, j * total / (steps * steps) as f64);
    let beta2 = Complex64::new(0.0, -j2 * total2 / (steps2 * steps2) as f64);
    Ok(CouplingVector { betas: [bp.conj(), bm.conj(), cp, cm, beta, beta2], eps, eps_prime })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    type M2 = [[Complex64; 2]; 2];

    fn transfer(beta: Complex64) -> M2 {
        [[beta.exp(), (-beta).exp()], [(-beta).exp(), beta.exp()]]
    }

    fn mul(a: M2, b: M2) -> M2 {
        let mut c = [[Complex64::new(0.0, 0.0); 2]; 2];
        for r in 0..2 {
            for k in 0..2 {
                for col in 0..2 {
                    c[r][col] += a[r][k] * b[k][col];
                }
            }
        }
        c
    }

    fn dist(a: M2, b: M2) -> f64 {
        (0..4).map(|i| (a[i / 2][i % 2] - b[i / 2][i % 2]).norm()).fold(0.0, f64::max)
    }

    #[test]
    fn consistency_equations_hold() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let i = Complex64::i();
        for _ in 0..50 {
            let (tau, hp) = (rng.random_range(1e-3..0.5), rng.random_range(0.1..2.0));
            let (tau2, hp2) = (rng.random_range(1e-3..0.5), rng.random_range(0.1..2.0));
            let c = beta_star(tau, hp, tau2, hp2, 1.0, 1.0, 3.0, 2.0, 4, 5).unwrap();
            let [bp, bm, cp, cm, _, _] = c.betas;
            assert!(((-2.0 * bp).exp() - (i * (1.0 + c.eps))).norm() < 1e-12);
            assert!(((-2.0 * bm).exp() - (-i * (1.0 - c.eps))).norm() < 1e-12);
            assert!(((-2.0 * cp).exp() - (-i * (1.0 + c.eps_prime))).norm() < 1e-12);
            assert!(((-2.0 * cm).exp() - (i * (1.0 - c.eps_prime))).norm() < 1e-12);
            assert!((2.0 * c.eps / (2.0 - c.eps * c.eps) - (tau * hp).tan()).abs() < 1e-12);
            assert!((2.0 * c.eps_prime / (2.0 - c.eps_prime.powi(2)) - (tau2 * hp2).tan()).abs() < 1e-12);
        }
    }

    #[test]
    fn transfer_product_identity() {
        let eps = epsilon_for(0.3).unwrap();
        let c = beta_star(0.3, 1.0, 0.3, 1.0, 1.0, 1.0, 1.0, 1.0, 1, 1).unwrap();
        let (bp, bm) = (c.betas[2], c.betas[3]);
        let lhs = mul(transfer(bp), transfer(bm));
        let k = (2.0 - eps * eps) * (bp + bm).exp();
        let x = Complex64::new(0.0, -2.0 * eps / (2.0 - eps * eps));
        let rhs = [[k, k * x], [k * x, k]];
        assert!(dist(lhs, rhs) < 1e-12);

        let s = transfer_scalar(eps);
        let rot = lhs.map(|row| row.map(|z| z * s));
        let want = [
            [Complex64::new(0.3f64.cos(), 0.0), Complex64::new(0.0, -0.3f64.sin())],
            [Complex64::new(0.0, -0.3f64.sin()), Complex64::new(0.3f64.cos(), 0.0)],
        ];
        assert!(dist(rot, want) < 1e-12);
        // The forward pair gives the inverse rotation.
        let back = mul(transfer(c.betas[0]), transfer(c.betas[1])).map(|row| row.map(|z| z * s));
        assert!(dist(mul(back, rot), [[1.0.into(), 0.0.into()], [0.0.into(), 1.0.into()]]) < 1e-12);
    }

    #[test]
    fn small_step_expansion() {
        // e^{−2β±} = ∓i(1 ± ε) gives β± = ±iπ/4 ∓ τh⊥/2 + O(τ²h⊥²); the
        // forward pair is its conjugate.
        let th = 0.01;
        let c = beta_star(th, 1.0, th, 1.0, 1.0, 1.0, 1.0, 1.0, 1, 1).unwrap();
        let want_p = Complex64::new(-th / 2.0, FRAC_PI_4);
        let want_m = Complex64::new(th / 2.0, -FRAC_PI_4);
        assert!((c.betas[2] - want_p).norm() < th * th);
        assert!((c.betas[3] - want_m).norm() < th * th);
        assert!((c.betas[0] - want_p.conj()).norm() < th * th);
        assert!((c.betas[1] - want_m.conj()).norm() < th * th);
    }

    #[test]
    fn imaginary_spatial_couplings() {
        let c = beta_star(0.1, 1.0, 0.2, 1.0, 2.0, 3.0, 4.0, 6.0, 2, 3).unwrap();
        assert_eq!(c.betas[4], Complex64::new(0.0, 2.0));
        assert_eq!(c.betas[5], Complex64::new(0.0, -2.0));
    }

    #[test]
    fn tangent_pole_rejected() {
        assert!(epsilon_for(FRAC_PI_2).is_err());
        assert!(epsilon_for(2f64.atan()).is_err());
        assert!(epsilon_for(2f64.atan() - 1e-9).unwrap() < 1.0);
        assert!(epsilon_for(0.0).is_err());
        assert!(epsilon_for(-0.1).is_err());
    }
}
