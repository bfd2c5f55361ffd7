//! A posteriori confidence for estimates built as weighted sums of
//! `±1` Bernoulli outcomes: moment estimators, a Berry-Esséen lower bound
//! on the coverage probability, and a Hoeffding sample-size helper.

use serde::Serialize;
use statrs::function::erf::erfc;

use crate::error::{check_len, Error, Result};

/// Berry-Esséen constant.
pub const C_BE: f64 = 0.56;

/// Outcomes `X_j(k) ∈ {−1, +1}`, `M` per sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BernoulliBatch {
    outcomes: Vec<Vec<i8>>,
}

impl BernoulliBatch {
    pub fn new(outcomes: Vec<Vec<i8>>) -> Result<Self> {
        let m = outcomes.first().map_or(0, Vec::len);
        if m == 0 {
            return Err(Error::InvalidArgument("batch needs at least one outcome per sequence".into()));
        }
        for seq in &outcomes {
            check_len("outcomes per sequence", m, seq.len())?;
            if let Some(x) = seq.iter().find(|&&x| x != 1 && x != -1) {
                return Err(Error::InvalidArgument(format!("outcome {x} is not ±1")));
            }
        }
        Ok(Self { outcomes })
    }

    pub fn sequences(&self) -> &[Vec<i8>] {
        &self.outcomes
    }

    pub fn shots(&self) -> usize {
        self.outcomes[0].len()
    }

    /// Number of `−1` outcomes per sequence.
    pub fn minus_counts(&self) -> Vec<usize> {
        self.outcomes.iter().map(|s| s.iter().filter(|&&x| x == -1).count()).collect()
    }
}

/// Intermediate values of the bound, kept for audit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CltReport {
    pub shots: usize,
    pub p_hat: Vec<f64>,
    pub e2: Vec<f64>,
    pub e3: Vec<f64>,
    pub eps: Vec<f64>,
    pub s: f64,
    pub delta: f64,
    /// `𝒱_M`, the lower bound on the variance sum.
    pub variance_floor: f64,
    pub d_tilde: f64,
    /// `−∞` (serialized as `null`) when degenerate.
    pub lambda_tilde: f64,
    /// Lower bound `𝓛` on `Prob[|Â − A| < Δ]`.
    pub bound: f64,
    /// Estimated probability that `bound` is valid, with `p̂` in place of `p`.
    pub confidence: f64,
    pub degenerate: bool,
}

/// `p̂` with `(1/M) Σ X = 1 − 2p̂`.
pub fn estimate_p(outcomes: &[i8]) -> Result<f64> {
    if outcomes.is_empty() {
        return Err(Error::InvalidArgument("empty outcome sequence".into()));
    }
    let mean = outcomes.iter().map(|&x| x as f64).sum::<f64>() / outcomes.len() as f64;
    Ok(0.5 * (1.0 - mean))
}

/// `(E₂, E₃) = (4p(1−p), 8p(1 − 3p + 4p² − 2p³))`, the second and absolute
/// third central moments of a `±1` variable with `P(−1) = p`.
pub fn moment_estimates(p: f64) -> Result<(f64, f64)> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!("probability {p} outside [0, 1]")));
    }
    let e2 = 4.0 * p * (1.0 - p);
    let e3 = 8.0 * p * (1.0 - 3.0 * p + 4.0 * p * p - 2.0 * p * p * p);
    Ok((e2, e3))
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Berry-Esséen bound for `Â = Σ_j w_j (1/M) Σ_k X_j(k)`.
pub fn clt_bound(batch: &BernoulliBatch, weights: &[f64], delta: f64, s: f64) -> Result<CltReport> {
    let counts = batch.minus_counts();
    clt_bound_from_counts(&counts, batch.shots(), weights, delta, s)
}

/// [`clt_bound`] from per-sequence `−1` counts, which is all the bound
/// depends on.
pub fn clt_bound_from_counts(
    minus_counts: &[usize],
    shots: usize,
    weights: &[f64],
    delta: f64,
    s: f64,
) -> Result<CltReport> {
    check_len("weights", minus_counts.len(), weights.len())?;
    if shots == 0 {
        return Err(Error::InvalidArgument("shots must be at least 1".into()));
    }
    if !(delta > 0.0 && s > 0.0) {
        return Err(Error::InvalidArgument(format!("need Δ > 0 and s > 0, got Δ = {delta}, s = {s}")));
    }
    if let Some(&c) = minus_counts.iter().find(|&&c| c > shots) {
        return Err(Error::InvalidArgument(format!("count {c} exceeds {shots} shots")));
    }
    let m = shots as f64;
    let p_hat: Vec<f64> = minus_counts.iter().map(|&c| c as f64 / m).collect();
    let (e2, e3): (Vec<f64>, Vec<f64>) = p_hat.iter().map(|&p| moment_estimates(p).unwrap()).unzip();
    let eps: Vec<f64> = e2.iter().map(|&e| e / (4.0 + s)).collect();

    let mut num = 0.0;
    let mut floor = 0.0;
    let mut ceil = 0.0;
    for j in 0..weights.len() {
        let w = weights[j].abs();
        num += w.powi(3) * (e3[j] + 8.0 * eps[j]);
        floor += w * w * (e2[j] - 4.0 * eps[j]);
        ceil += w * w * (e2[j] + 4.0 * eps[j]);
    }
    let degenerate = floor <= 0.0;
    let (d_tilde, lambda_tilde) = if degenerate {
        (0.0, f64::NEG_INFINITY)
    } else {
        (num / (m.sqrt() * floor.powf(1.5)), m.sqrt() / ceil.sqrt())
    };
    let bound = 1.0 - 2.0 * normal_cdf(-lambda_tilde * delta) - 2.0 * C_BE * d_tilde;
    let hoeffding: f64 = eps.iter().map(|&e| 1.0 - 2.0 * (-e * e * m).exp()).product();
    let pathological: f64 = p_hat.iter().map(|&p| p.powf(m) + (1.0 - p).powf(m)).product();
    Ok(CltReport {
        shots,
        p_hat,
        e2,
        e3,
        eps,
        s,
        delta,
        variance_floor: floor,
        d_tilde,
        lambda_tilde,
        bound,
        confidence: hoeffding - pathological,
        degenerate,
    })
}

/// Smallest `M` with `1 − 2e^{−2ε²M} ≥ confidence`. A non-positive
/// confidence asks for nothing and gets `M = 1`.
pub fn hoeffding_m(epsilon: f64, confidence: f64) -> Result<u64> {
    if !(epsilon > 0.0) || confidence >= 1.0 {
        return Err(Error::InvalidArgument(format!(
            "need ε > 0 and confidence < 1, got ε = {epsilon}, confidence = {confidence}"
        )));
    }
    if confidence <= 0.0 {
        return Ok(1);
    }
    let m = ((2.0 / (1.0 - confidence)).ln() / (2.0 * epsilon * epsilon)).ceil();
    Ok((m as u64).max(1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn p_hat_examples() {
        assert_eq!(estimate_p(&[1, 1, 1]).unwrap(), 0.0);
        assert_eq!(estimate_p(&[-1, -1]).unwrap(), 1.0);
        assert_eq!(estimate_p(&[1, -1, -1, 1]).unwrap(), 0.5);
        assert!(estimate_p(&[]).is_err());
    }

    #[test]
    fn moments_and_lipschitz_constants() {
        assert_eq!(moment_estimates(0.0).unwrap(), (0.0, 0.0));
        assert_eq!(moment_estimates(0.5).unwrap(), (1.0, 1.0));
        assert!(moment_estimates(1.2).is_err());
        let n = 10_000;
        let (mut d2, mut d3) = (0.0f64, 0.0f64);
        let mut prev = moment_estimates(0.0).unwrap();
        for i in 1..=n {
            let cur = moment_estimates(i as f64 / n as f64).unwrap();
            d2 = d2.max(((cur.0 - prev.0) * n as f64).abs());
            d3 = d3.max(((cur.1 - prev.1) * n as f64).abs());
            prev = cur;
        }
        assert!(d2 <= 4.0 + 1e-9 && d3 <= 8.0 + 1e-9, "{d2} {d3}");
    }

    #[test]
    fn normal_cdf_symmetry() {
        assert_eq!(normal_cdf(0.0), 0.5);
        for i in 0..100 {
            let x = i as f64 * 0.1;
            assert!((normal_cdf(-x) - (1.0 - normal_cdf(x))).abs() < 1e-12);
        }
    }

    #[test]
    fn identical_outcomes_are_degenerate() {
        let b = BernoulliBatch::new(vec![vec![1; 20], vec![-1; 20]]).unwrap();
        let r = clt_bound(&b, &[0.3, -0.7], 0.1, 1.0).unwrap();
        assert!(r.degenerate && r.d_tilde == 0.0 && r.lambda_tilde == f64::NEG_INFINITY);
        assert!(r.bound <= 1.0);
    }

    #[test]
    fn large_delta_limit() {
        let r = clt_bound_from_counts(&[40, 55, 12], 100, &[0.5, 1.0, -0.2], 1e6, 1.0).unwrap();
        assert!((r.bound - (1.0 - 2.0 * C_BE * r.d_tilde)).abs() < 1e-12);
    }

    #[test]
    fn hoeffding_examples() {
        assert_eq!(hoeffding_m(0.1, 0.95).unwrap(), 185);
        assert_eq!(hoeffding_m(0.1, 0.0).unwrap(), 1);
        assert_eq!(hoeffding_m(0.1, 0.01).unwrap(), 36);
        let (a, b) = (hoeffding_m(0.05, 0.99).unwrap(), hoeffding_m(0.1, 0.99).unwrap());
        assert!(a.abs_diff(4 * b) <= 4);
    }
}
