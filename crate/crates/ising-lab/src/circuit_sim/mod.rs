//! Dense statevector simulation of layered diagonal/rotation/phase/G circuits,
//! their classical Ising images, and statistics-level simulation of the two
//! overlap-measurement protocols.

mod duality;
mod program;
mod protocol;
mod state;

pub use duality::{enlarged_model, g_exponents, rotation_exponents, Boundary, EnlargedModel};
pub use program::{
    g_gate, layered_program, phase_gate, rotation_gate, CircuitProgram, DiagonalLayer, GLayer, Layer, PhaseLayer,
    RotationLayer,
};
pub use protocol::{
    full_register_distribution, simulate_overlap, statistical_distribution, target_expectation, Observable, Protocol,
    ProtocolEstimate, Tally, FULL_REGISTER_CAP,
};
pub use state::{Gate2, QuantumState};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ising_core::Weight;

/// Default qubit cap for [`amplitude`].
pub const QUBIT_CAP: usize = 24;
/// Default qubit cap for [`trace_amplitude`], which costs `4^n`.
pub const TRACE_QUBIT_CAP: usize = 12;

fn check_cap(what: &'static str, n: usize, cap: usize) -> Result<()> {
    if n > cap {
        return Err(Error::CapExceeded { what, size: n, cap });
    }
    Ok(())
}

/// `W|+_x^{⊗n}⟩` for the program unitary `W`.
pub fn evolve<W: Weight>(program: &CircuitProgram<W>) -> Result<QuantumState> {
    check_cap("statevector qubits", program.qubits(), QUBIT_CAP)?;
    let mut state = QuantumState::plus_x(program.qubits());
    program.apply(&mut state)?;
    Ok(state)
}

/// `⟨+_x^{⊗n}|W|+_x^{⊗n}⟩`.
pub fn amplitude<W: Weight>(program: &CircuitProgram<W>) -> Result<Complex64> {
    amplitude_capped(program, QUBIT_CAP)
}

pub fn amplitude_capped<W: Weight>(program: &CircuitProgram<W>, cap: usize) -> Result<Complex64> {
    check_cap("statevector qubits", program.qubits(), cap)?;
    let mut state = QuantumState::plus_x(program.qubits());
    program.apply(&mut state)?;
    QuantumState::plus_x(program.qubits()).inner(&state)
}

/// `Tr[W]/2^n`, evaluated column by column.
pub fn trace_amplitude<W: Weight>(program: &CircuitProgram<W>) -> Result<Complex64> {
    let n = program.qubits();
    check_cap("trace qubits", n, TRACE_QUBIT_CAP)?;
    let dim = 1usize << n;
    let diag: Vec<Complex64> = (0..dim)
        .into_par_iter()
        .map(|b| {
            let mut s = QuantumState::basis(n, b)?;
            program.apply(&mut s)?;
            Ok(s.amplitudes()[b])
        })
        .collect::<Result<_>>()?;
    Ok(diag.iter().sum::<Complex64>() / dim as f64)
}

/// Simulates a protocol on `Φ = |+_x^{⊗n}⟩`, `Ψ = W|+_x^{⊗n}⟩`, so the
/// estimated overlap is [`amplitude`].
pub fn simulate_protocol(
    program: &CircuitProgram<f64>,
    protocol: Protocol,
    shots: usize,
    seed: u64,
) -> Result<ProtocolEstimate> {
    let psi = evolve(program)?;
    simulate_overlap(&QuantumState::plus_x(program.qubits()), &psi, protocol, shots, seed)
}
