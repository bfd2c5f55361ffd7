use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::circuit_sim::{Gate2, QuantumState};
use crate::error::{Error, Result};

/// Largest register the dense checks accept.
pub const DENSE_QUBIT_CAP: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PauliAxis {
    X,
    Y,
    Z,
}

/// Translationally invariant gates on the mirrored `2n`-qubit register.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GlobalGate {
    /// `Π_j CP(j, j+1)` along the open chain, `CP = diag(1, 1, 1, −1)`.
    CpTot,
    /// `Π_j exp(iθ/2 σ^axis_j)`.
    SigmaTot { axis: PauliAxis, theta: f64 },
    /// `Π_j exp(iπ/(2√2) (σ^x_j + σ^z_j))`.
    HadTot,
    /// `σ^z_tot(π) σ^y_tot(π/2) CP_tot`, with `CP_tot` applied first.
    Shift,
}

/// Logical gates on qubit `k` (1-based) of an `n`-qubit computation, acting
/// on qubits `k` and its mirror `2n − k + 1` of the physical register.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LogicalGate {
    /// `exp(iα/2 (σ^z_k + σ^z_k̄))`.
    Z { k: usize, alpha: f64 },
    /// `exp(iα/2 (σ^x_k + σ^x_k̄))`.
    X { k: usize, alpha: f64 },
    /// `exp(iα (σ^z_k σ^x_{k+1} + σ^z_k̄ σ^x_{k̄−1}))`.
    V { k: usize, alpha: f64 },
    /// Hadamard on `k` and its mirror.
    Had { k: usize },
}

impl LogicalGate {
    fn qubit(&self) -> usize {
        match *self {
            Self::Z { k, .. } | Self::X { k, .. } | Self::V { k, .. } | Self::Had { k } => k,
        }
    }
}

fn pauli(axis: PauliAxis) -> Gate2 {
    let (o, z, i) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 1.0));
    match axis {
        PauliAxis::X => [[z, o], [o, z]],
        PauliAxis::Y => [[z, -i], [i, z]],
        PauliAxis::Z => [[o, z], [z, -o]],
    }
}

/// `exp(iθ/2 P)` for a Pauli `P`.
pub fn pauli_rotation(axis: PauliAxis, theta: f64) -> Gate2 {
    let p = pauli(axis);
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let mut g = [[Complex64::new(0.0, 0.0); 2]; 2];
    for (r, row) in g.iter_mut().enumerate() {
        for (col, x) in row.iter_mut().enumerate() {
            let id = if r == col { c } else { 0.0 };
            *x = Complex64::new(id, 0.0) + Complex64::new(0.0, s) * p[r][col];
        }
    }
    g
}

fn had_single() -> Gate2 {
    // exp(iφ(X+Z)) with ((X+Z)/√2)² = 1 and φ√2 = π/2 gives i(X+Z)/√2.
    let a = Complex64::new(0.0, 1.0 / SQRT_2);
    [[a, a], [a, -a]]
}

fn check_register(state: &QuantumState) -> Result<usize> {
    let q = state.qubits();
    if q == 0 || !q.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!("mirrored register needs an even qubit count, got {q}")));
    }
    Ok(q)
}

fn apply_cp_tot(state: &mut QuantumState) {
    let q = state.qubits();
    state.apply_diagonal(|b| {
        let pairs = (b & (b >> 1) & ((1usize << (q - 1)) - 1)).count_ones();
        Complex64::new(if pairs.is_multiple_of(2) { 1.0 } else { -1.0 }, 0.0)
    });
}

fn apply_everywhere(state: &mut QuantumState, g: &Gate2) -> Result<()> {
    for j in 0..state.qubits() {
        state.apply_single(j, g)?;
    }
    Ok(())
}

/// Applies one global gate. Qubit `j` (1-based) is bit `j − 1` of the basis index.
pub fn apply_global(state: &mut QuantumState, gate: &GlobalGate) -> Result<()> {
    check_register(state)?;
    match *gate {
        GlobalGate::CpTot => apply_cp_tot(state),
        GlobalGate::SigmaTot { axis, theta } => {
            if !theta.is_finite() {
                return Err(Error::InvalidArgument(format!("rotation angle {theta} is not finite")));
            }
            apply_everywhere(state, &pauli_rotation(axis, theta))?;
        }
        GlobalGate::HadTot => apply_everywhere(state, &had_single())?,
        GlobalGate::Shift => {
            apply_cp_tot(state);
            apply_everywhere(state, &pauli_rotation(PauliAxis::Y, FRAC_PI_2))?;
            apply_everywhere(state, &pauli_rotation(PauliAxis::Z, PI))?;
        }
    }
    Ok(())
}

/// Applies a sequence in order, first element first.
pub fn apply_sequence(state: &mut QuantumState, seq: &[GlobalGate]) -> Result<()> {
    seq.iter().try_for_each(|g| apply_global(state, g))
}

fn check_logical(gate: &LogicalGate, n: usize) -> Result<()> {
    let k = gate.qubit();
    let top = if matches!(gate, LogicalGate::V { .. }) { n.saturating_sub(1) } else { n };
    if k == 0 || k > top {
        return Err(Error::InvalidArgument(format!("logical qubit {k} out of range 1..={top} for n = {n}")));
    }
    if let LogicalGate::Z { alpha, .. } | LogicalGate::X { alpha, .. } | LogicalGate::V { alpha, .. } = *gate {
        if !alpha.is_finite() {
            return Err(Error::InvalidArgument(format!("rotation angle {alpha} is not finite")));
        }
    }
    Ok(())
}

/// Applies the target logical unitary directly, for comparison.
pub fn apply_logical(state: &mut QuantumState, gate: &LogicalGate) -> Result<()> {
    let q = check_register(state)?;
    let n = q / 2;
    check_logical(gate, n)?;
    let k = gate.qubit() - 1;
    let mirror = q - 1 - k;
    match *gate {
        LogicalGate::Z { alpha, .. } | LogicalGate::X { alpha, .. } => {
            let axis = if matches!(gate, LogicalGate::Z { .. }) { PauliAxis::Z } else { PauliAxis::X };
            let g = pauli_rotation(axis, alpha);
            state.apply_single(k, &g)?;
            state.apply_single(mirror, &g)?;
        }
        LogicalGate::V { alpha, .. } => {
            // The two terms commute; exp(iα Z_a X_b) = cos α + i sin α Z_a X_b.
            for (a, b) in [(k, k + 1), (mirror, mirror - 1)] {
                let mut flipped = state.clone();
                flipped.apply_single(b, &pauli(PauliAxis::X))?;
                flipped.apply_single(a, &pauli(PauliAxis::Z))?;
                let mixed: Vec<Complex64> = state
                    .amplitudes()
                    .iter()
                    .zip(flipped.amplitudes())
                    .map(|(&x, &y)| alpha.cos() * x + Complex64::new(0.0, alpha.sin()) * y)
                    .collect();
                *state = QuantumState::from_amplitudes(mixed)?;
            }
        }
        LogicalGate::Had { .. } => {
            let h = Complex64::new(1.0 / SQRT_2, 0.0);
            let g = [[h, h], [h, -h]];
            state.apply_single(k, &g)?;
            state.apply_single(mirror, &g)?;
        }
    }
    Ok(())
}

fn shifts(seq: &mut Vec<GlobalGate>, count: usize) {
    seq.extend(std::iter::repeat_n(GlobalGate::Shift, count));
}

fn sigma(axis: PauliAxis, theta: f64) -> GlobalGate {
    GlobalGate::SigmaTot { axis, theta }
}

/// `G^b Yπ G Yπ G^a` in application order: `a` shifts first.
fn conjugator(seq: &mut Vec<GlobalGate>, first: usize, last: usize) {
    shifts(seq, first);
    seq.push(sigma(PauliAxis::Y, PI));
    seq.push(GlobalGate::Shift);
    seq.push(sigma(PauliAxis::Y, PI));
    shifts(seq, last);
}

/// Global-gate sequence, in application order, whose product equals the
/// logical gate up to a global phase.
///
/// The conjugator `W = G^{2n−k} Yπ G Yπ G^k` commutes with every `σ^z` except
/// those on `k` and its mirror, which it flips, so `W σ^z_tot(−α/2) W σ^z_tot(α/2)`
/// leaves exactly the pair rotated by `α`. The `X` case uses the same trick
/// with `W` shifted by one. `V_{k,k+1}` is the `X₁` pair moved into place by
/// `G^k`, since `G` maps `σ^x₁` onto `σ^z_k σ^x_{k+1}` after `k` steps.
pub fn compile_logical(gate: &LogicalGate, n: usize) -> Result<Vec<GlobalGate>> {
    check_logical(gate, n)?;
    let q = 2 * n;
    let period = 2 * (q + 1);
    let mut seq = Vec::new();
    match *gate {
        LogicalGate::Z { k, alpha } => {
            seq.push(sigma(PauliAxis::Z, alpha / 2.0));
            conjugator(&mut seq, k, q - k);
            seq.push(sigma(PauliAxis::Z, -alpha / 2.0));
            conjugator(&mut seq, k, q - k);
        }
        LogicalGate::X { k, alpha } => {
            let rot = |seq: &mut Vec<GlobalGate>, t: f64| {
                seq.push(sigma(PauliAxis::Z, FRAC_PI_2));
                seq.push(sigma(PauliAxis::Y, t));
                seq.push(sigma(PauliAxis::Z, -FRAC_PI_2));
            };
            rot(&mut seq, -alpha / 2.0);
            conjugator(&mut seq, k - 1, q + 1 - k);
            rot(&mut seq, alpha / 2.0);
            conjugator(&mut seq, k - 1, q + 1 - k);
        }
        LogicalGate::V { k, alpha } => {
            shifts(&mut seq, period - k);
            seq.extend(compile_logical(&LogicalGate::X { k: 1, alpha: 2.0 * alpha }, n)?);
            shifts(&mut seq, k);
        }
        LogicalGate::Had { k } => {
            let z = compile_logical(&LogicalGate::Z { k, alpha: FRAC_PI_2 }, n)?;
            seq.extend(z.iter().copied());
            seq.extend(compile_logical(&LogicalGate::X { k, alpha: FRAC_PI_2 }, n)?);
            seq.extend(z);
        }
    }
    Ok(seq)
}

/// Largest deviation between two operators on `qubits` qubits after removing
/// a global phase, comparing their action on every basis state.
pub fn phase_distance(
    qubits: usize,
    a: impl Fn(&mut QuantumState) -> Result<()>,
    b: impl Fn(&mut QuantumState) -> Result<()>,
) -> Result<f64> {
    if qubits > DENSE_QUBIT_CAP {
        return Err(Error::CapExceeded {
            what: "dense operator comparison qubits",
            size: qubits,
            cap: DENSE_QUBIT_CAP,
        });
    }
    let mut phase: Option<Complex64> = None;
    let mut worst = 0.0f64;
    for col in 0..1usize << qubits {
        let mut x = QuantumState::basis(qubits, col)?;
        let mut y = x.clone();
        a(&mut x)?;
        b(&mut y)?;
        let ph = *phase.get_or_insert_with(|| {
            let (i, yi) = y
                .amplitudes()
                .iter()
                .enumerate()
                .max_by(|p, q| p.1.norm().total_cmp(&q.1.norm()))
                .unwrap();
            let r = x.amplitudes()[i] / yi;
            r / r.norm()
        });
        for (&u, &v) in x.amplitudes().iter().zip(y.amplitudes()) {
            worst = worst.max((u - ph * v).norm());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reverse(state: &mut QuantumState) -> Result<()> {
        let q = state.qubits();
        let amps = state.amplitudes();
        let out = (0..amps.len())
            .map(|b| {
                let r = (0..q).fold(0usize, |acc, j| acc | (((b >> j) & 1) << (q - 1 - j)));
                amps[r]
            })
            .collect();
        *state = QuantumState::from_amplitudes(out)?;
        Ok(())
    }

    #[test]
    fn shift_reverses_register_and_has_period() {
        for n in 1..=3 {
            let q = 2 * n;
            let d = phase_distance(q, |s| apply_sequence(s, &vec![GlobalGate::Shift; q + 1]), reverse).unwrap();
            assert!(d < 1e-10, "n = {n}: {d}");
            let id = phase_distance(q, |s| apply_sequence(s, &vec![GlobalGate::Shift; 2 * (q + 1)]), |_| Ok(())).unwrap();
            assert!(id < 1e-10, "n = {n}: {id}");
        }
    }

    #[test]
    fn generators_are_unitary() {
        let gates = [
            GlobalGate::CpTot,
            GlobalGate::HadTot,
            GlobalGate::Shift,
            sigma(PauliAxis::X, 0.3),
            sigma(PauliAxis::Y, -1.1),
            sigma(PauliAxis::Z, 2.0),
        ];
        for g in gates {
            for b in 0..16 {
                let mut s = QuantumState::basis(4, b).unwrap();
                apply_global(&mut s, &g).unwrap();
                assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn z_rotation_example() {
        let target = LogicalGate::Z { k: 1, alpha: PI / 4.0 };
        let seq = compile_logical(&target, 2).unwrap();
        let d = phase_distance(4, |s| apply_sequence(s, &seq), |s| apply_logical(s, &target)).unwrap();
        assert!(d < 1e-10, "{d}");
    }

    #[test]
    fn all_logical_gates_compile() {
        for n in 1..=4 {
            for k in 1..=n {
                let mut gates = vec![
                    LogicalGate::Z { k, alpha: 0.37 },
                    LogicalGate::X { k, alpha: -1.21 },
                    LogicalGate::Had { k },
                ];
                if k < n {
                    gates.push(LogicalGate::V { k, alpha: 0.53 });
                }
                for g in gates {
                    let seq = compile_logical(&g, n).unwrap();
                    let d = phase_distance(2 * n, |s| apply_sequence(s, &seq), |s| apply_logical(s, &g)).unwrap();
                    assert!(d < 1e-10, "{g:?} n = {n}: {d}");
                }
            }
        }
    }

    #[test]
    fn zero_angle_is_identity() {
        for g in [LogicalGate::Z { k: 2, alpha: 0.0 }, LogicalGate::X { k: 1, alpha: 0.0 }, LogicalGate::V { k: 1, alpha: 0.0 }] {
            let seq = compile_logical(&g, 2).unwrap();
            assert!(phase_distance(4, |s| apply_sequence(s, &seq), |_| Ok(())).unwrap() < 1e-10);
        }
    }

    #[test]
    fn index_errors() {
        assert!(compile_logical(&LogicalGate::Z { k: 0, alpha: 1.0 }, 2).is_err());
        assert!(compile_logical(&LogicalGate::X { k: 3, alpha: 1.0 }, 2).is_err());
        assert!(compile_logical(&LogicalGate::V { k: 2, alpha: 1.0 }, 2).is_err());
    }
}
