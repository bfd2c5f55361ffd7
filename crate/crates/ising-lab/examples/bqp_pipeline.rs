//! A two-step circuit on four physical qubits, reduced to an Ising instance
//! whose real-temperature partition values recover the amplitude.

use ising_lab::bqp_reduction::{
    circuit_to_ising, mprime_bound, reconstruct_amplitude, t_amplitude, ExactOracle, NoisyOracle, Precision,
    TOperator,
};

fn main() -> ising_lab::Result<()> {
    let n = 2;
    let ops = [TOperator::at(0, true, true), TOperator::at(1, true, false), TOperator::at(2, false, true)];
    let inst = circuit_to_ising(&ops, n)?;
    println!("spins {}, M′ = {} (bound {})", inst.model.site_count(), inst.mprime, mprime_bound(n, ops.len()));
    let k = inst.node_count();
    let want = t_amplitude(&ops, n)?;
    let exact = reconstruct_amplitude(&ExactOracle::new(&inst)?, &inst, k, Precision::Extended)?;
    let double = reconstruct_amplitude(&ExactOracle::new(&inst)?, &inst, k, Precision::Double)?;
    let noisy = reconstruct_amplitude(&NoisyOracle::new(&inst, 1e-30, 4)?, &inst, k, Precision::Extended)?;
    println!("statevector         {want:.10}");
    println!("extended precision  {exact:.10}");
    println!("double precision    {double:.3e}");
    println!("noisy oracle 1e-30  {noisy:.10}");
    Ok(())
}
