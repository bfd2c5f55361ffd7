//! Command-line front end. Every subcommand writes one JSON or CSV artifact,
//! to stdout or into the `--out` directory, and supports `--selftest`.
//!
//! Exit status: 0 on success, 1 on a domain error, 2 on a usage error.

use std::collections::hash_map::DefaultHasher;
use std::f64::consts::PI;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::hash::{Hash, Hasher};
use std::io::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::bqp_reduction::{
    self as bqp, circuit_to_ising, compile_logical, lagrange_estimate, mprime_bound, phase_distance, required_delta,
    t_amplitude, LogicalGate, Precision, TOperator,
};
use crate::circuit_sim::{
    amplitude, simulate_overlap, simulate_protocol, CircuitProgram, DiagonalLayer, Layer, PhaseLayer, Protocol,
    QuantumState,
};
use crate::error::{Error, Result};
use crate::error_stats::{estimate_p, hoeffding_m, moment_estimates};
use crate::fidelity_overlap::{
    adiabatic_time, fidelity_sweep, ground_state_fidelity, overlap_instance, write_sweep_csv, AdiabaticPlan,
    QuantumIsingParams,
};
use crate::fpras::{
    self, estimate_partition, finesse_bound, sample_count, sampling_distribution, schedule, sequential_samples,
    snake_order, EstimatorConfig,
};
use crate::ising_core::{
    corner_magnetization, partition_function, read_model, xi_coefficients, IsingModel, Lattice, Method, PinnedSet,
    SpinConfiguration,
};
use crate::knots::{knot_invariant, potts_partition, PottsParams, SignedGraph};
use crate::reconstruction::{kernel_w, wick_alpha, DisorderedProblem, Thermo};

/// Environment variable naming a directory for memoized brute-force results.
pub const CACHE_ENV: &str = "ISING_LAB_CACHE";

#[derive(Debug, Parser)]
#[command(name = "ising-lab", version, about = "Quantum-circuit / classical-Ising duality toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Exact partition function Z(β) of a model file.
    Partition(PartitionArgs),
    /// Overlap amplitude of a circuit program, exact or by a sampled protocol.
    Amplitude(AmplitudeArgs),
    /// Real-temperature thermodynamics continued from complex-temperature samples.
    Reconstruct(ReconstructArgs),
    /// Knot invariant from the Potts partition function of a catalog diagram.
    Knot(KnotArgs),
    /// Circuit-to-Ising reduction and amplitude recovery by interpolation.
    Bqp(BqpArgs),
    /// Ground-state fidelity sweep of the transverse-field Ising chain.
    Fidelity(FidelityArgs),
    /// Randomized approximation of Z for a ferromagnet in a uniform field.
    Fpras(FprasArgs),
}

#[derive(Debug, Args)]
struct Common {
    /// Output directory; artifacts go to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker thread cap; results do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
    /// Overwrite existing artifacts.
    #[arg(long)]
    force: bool,
    /// Run the module's closed-form checks instead of a workload.
    #[arg(long)]
    selftest: bool,
}

#[derive(Debug, Args)]
struct PartitionArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long, conflicts_with = "betas")]
    beta: Option<f64>,
    /// Imaginary part of β for a single evaluation.
    #[arg(long, default_value_t = 0.0, requires = "beta")]
    beta_im: f64,
    /// Real β grid `start:step:end`, written as CSV.
    #[arg(long)]
    betas: Option<String>,
    /// `enumerate` or `transfer`; chosen by size when absent.
    #[arg(long)]
    method: Option<String>,
}

#[derive(Debug, Args)]
struct AmplitudeArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    program: Option<PathBuf>,
    /// Shots for a sampled protocol; the exact amplitude only when absent.
    #[arg(long)]
    shots: Option<usize>,
    #[arg(long, default_value_t = 2)]
    protocol: u8,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct ReconstructArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long, default_value = "0:0.05:2")]
    betas: String,
    /// Gaussian noise per sample component.
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct KnotArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    name: Option<String>,
    #[arg(long)]
    q: Option<u32>,
}

#[derive(Debug, Args)]
struct BqpArgs {
    #[command(flatten)]
    common: Common,
    /// Logical qubits `n`; the register has `2n`.
    #[arg(long, default_value_t = 2)]
    qubits: usize,
    /// Comma-separated steps, each one of `-`, `c`, `z`, `cz` (controlled phase, Z rotation).
    #[arg(long)]
    ops: Option<String>,
    /// Relative error of a noisy partition oracle.
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Interpolation nodes; `2M′ + 1` when absent.
    #[arg(long)]
    nodes: Option<usize>,
    /// Use double instead of extended-precision interpolation.
    #[arg(long)]
    double: bool,
}

#[derive(Debug, Args)]
struct FidelityArgs {
    #[command(flatten)]
    common: Common,
    /// Sites of the chain.
    #[arg(long, default_value_t = 4)]
    sites: usize,
    #[arg(long)]
    periodic: bool,
    #[arg(long, default_value_t = 1.0)]
    j: f64,
    /// Transverse-field grid `start:step:end`.
    #[arg(long, default_value = "0.1:0.05:2")]
    hperp: String,
    #[arg(long, default_value_t = 0.2)]
    dh: f64,
}

#[derive(Debug, Args)]
struct FprasArgs {
    #[command(flatten)]
    common: Common,
    /// Ferromagnet whose fields all share one value `h`.
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long, default_value_t = 0.1)]
    eps: f64,
    #[arg(long, default_value_t = 1.0)]
    eta: f64,
    /// Per-stage sample count override.
    #[arg(long)]
    samples: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
}

enum Failure {
    Usage(String),
    Domain(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Domain(e)
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

fn need<T>(v: Option<T>, flag: &str) -> Outcome<T> {
    v.ok_or_else(|| Failure::Usage(format!("missing required flag {flag}")))
}

/// Parses `argv` (program name first), runs the subcommand and returns the
/// exit status.
pub fn run(args: impl IntoIterator<Item = OsString>) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let threads = common(&cli.command).threads.unwrap_or(0);
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: thread pool: {e}");
            return 1;
        }
    };
    match pool.install(|| dispatch(&cli.command)) {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            2
        }
        Err(Failure::Domain(e)) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn common(cmd: &Command) -> &Common {
    match cmd {
        Command::Partition(a) => &a.common,
        Command::Amplitude(a) => &a.common,
        Command::Reconstruct(a) => &a.common,
        Command::Knot(a) => &a.common,
        Command::Bqp(a) => &a.common,
        Command::Fidelity(a) => &a.common,
        Command::Fpras(a) => &a.common,
    }
}

fn dispatch(cmd: &Command) -> Outcome<()> {
    let c = common(cmd);
    if c.selftest {
        let checks = match cmd {
            Command::Partition(_) => selftest_partition(),
            Command::Amplitude(_) => selftest_amplitude(),
            Command::Reconstruct(_) => selftest_reconstruct(),
            Command::Knot(_) => selftest_knot(),
            Command::Bqp(_) => selftest_bqp(),
            Command::Fidelity(_) => selftest_fidelity(),
            Command::Fpras(_) => selftest_fpras(),
        };
        return report(checks);
    }
    match cmd {
        Command::Partition(a) => cmd_partition(a),
        Command::Amplitude(a) => cmd_amplitude(a),
        Command::Reconstruct(a) => cmd_reconstruct(a),
        Command::Knot(a) => cmd_knot(a),
        Command::Bqp(a) => cmd_bqp(a),
        Command::Fidelity(a) => cmd_fidelity(a),
        Command::Fpras(a) => cmd_fpras(a),
    }
}

/// Writes `out/<name>` (refusing to clobber without `--force`) or prints to stdout.
fn emit(common: &Common, name: &str, body: &[u8]) -> Outcome<()> {
    match &common.out {
        None => {
            std::io::stdout().write_all(body).map_err(Error::from)?;
            Ok(())
        }
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(Error::from)?;
            let path = dir.join(name);
            if path.exists() && !common.force {
                return Err(Error::InvalidArgument(format!(
                    "{} exists; pass --force to overwrite",
                    path.display()
                ))
                .into());
            }
            std::fs::write(&path, body).map_err(Error::from)?;
            eprintln!("wrote {}", path.display());
            Ok(())
        }
    }
}

fn emit_json(common: &Common, name: &str, value: &serde_json::Value) -> Outcome<()> {
    let mut body = serde_json::to_vec_pretty(value).map_err(Error::from)?;
    body.push(b'\n');
    emit(common, name, &body)
}

/// Parses `start:step:end` into an inclusive grid.
fn parse_range(flag: &str, text: &str) -> Outcome<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    let bad = || Failure::Usage(format!("{flag} expects start:step:end, got {text:?}"));
    let [a, s, b] = parts.as_slice() else {
        return Err(bad());
    };
    let (a, s, b): (f64, f64, f64) = (
        a.trim().parse().map_err(|_| bad())?,
        s.trim().parse().map_err(|_| bad())?,
        b.trim().parse().map_err(|_| bad())?,
    );
    if !(s > 0.0 && a.is_finite() && b.is_finite() && b >= a) {
        return Err(Failure::Usage(format!("{flag}: need step > 0 and end ≥ start, got {text:?}")));
    }
    let count = ((b - a) / s + 1e-9).floor() as usize + 1;
    // Rounding keeps grid points like 0.15 from printing as 0.15000000000000002.
    Ok((0..count).map(|i| ((a + i as f64 * s) * 1e12).round() / 1e12).collect())
}

fn seed_for(seed: Option<u64>, what: &str) -> Outcome<u64> {
    seed.ok_or_else(|| Failure::Usage(format!("{what} is stochastic and needs --seed")))
}

/// Values are stored as IEEE bit patterns so a cache hit is bit-identical to
/// a fresh computation.
#[derive(Serialize, Deserialize)]
struct CacheEntry {
    key: String,
    re_bits: u64,
    im_bits: u64,
}

/// Memoizes `compute` under `key` in `$ISING_LAB_CACHE`, when set. The file
/// name is a hash of the key; the stored key is compared on read.
fn cached(key: &str, compute: impl FnOnce() -> Result<Complex64>) -> Result<Complex64> {
    let Some(dir) = std::env::var_os(CACHE_ENV).map(PathBuf::from) else {
        return compute();
    };
    let mut h = DefaultHasher::new();
    key.hash(&mut h);
    let path = dir.join(format!("z-{:016x}.json", h.finish()));
    if let Ok(text) = std::fs::read_to_string(&path) {
        if let Ok(entry) = serde_json::from_str::<CacheEntry>(&text) {
            if entry.key == key {
                return Ok(Complex64::new(f64::from_bits(entry.re_bits), f64::from_bits(entry.im_bits)));
            }
        }
    }
    let value = compute()?;
    std::fs::create_dir_all(&dir)?;
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, serde_json::to_vec(&CacheEntry {
            key: key.to_owned(),
            re_bits: value.re.to_bits(),
            im_bits: value.im.to_bits(),
        })?)?;
    std::fs::rename(&tmp, &path)?;
    Ok(value)
}

fn cached_partition(model: &IsingModel, model_json: &str, beta: Complex64, method: Method) -> Result<Complex64> {
    let key = format!("partition/v1/{method:?}/{:e}/{:e}/{model_json}", beta.re, beta.im);
    cached(&key, || partition_function(model, beta, method))
}

fn cmd_partition(a: &PartitionArgs) -> Outcome<()> {
    let path = need(a.model.as_deref(), "--model")?;
    let model: IsingModel = read_model(path)?;
    let model_json = serde_json::to_string(&model).map_err(Error::from)?;
    let method = match a.method.as_deref() {
        None if model.site_count() <= 26 => Method::Enumerate,
        None => Method::Transfer,
        Some("enumerate") => Method::Enumerate,
        Some("transfer") => Method::Transfer,
        Some(m) => return Err(Failure::Usage(format!("--method must be enumerate or transfer, got {m:?}"))),
    };
    match (a.beta, a.betas.as_deref()) {
        (Some(b), _) => {
            let beta = Complex64::new(b, a.beta_im);
            let z = cached_partition(&model, &model_json, beta, method)?;
            emit_json(
                &a.common,
                "partition.json",
                &json!({ "beta": beta, "sites": model.site_count(), "method": format!("{method:?}").to_lowercase(), "value": z }),
            )
        }
        (None, Some(r)) => {
            let mut csv = String::from("beta,re_z,im_z\n");
            for b in parse_range("--betas", r)? {
                let z = cached_partition(&model, &model_json, Complex64::new(b, 0.0), method)?;
                writeln!(csv, "{b},{:e},{:e}", z.re, z.im).expect("string write");
            }
            emit(&a.common, "partition.csv", csv.as_bytes())
        }
        (None, None) => Err(Failure::Usage("partition needs --beta or --betas".into())),
    }
}

fn cmd_amplitude(a: &AmplitudeArgs) -> Outcome<()> {
    let program = CircuitProgram::read(need(a.program.as_deref(), "--program")?)?;
    let exact = amplitude(&program)?;
    let value = match a.shots {
        None => json!({ "value": exact }),
        Some(shots) => {
            let seed = seed_for(a.seed, "a sampled protocol")?;
            let protocol = Protocol::try_from(a.protocol).map_err(|e| Failure::Usage(e.to_string()))?;
            let est = simulate_protocol(&program, protocol, shots, seed)?;
            let target = match protocol {
                Protocol::One => Complex64::new(exact.norm_sqr(), 0.0),
                Protocol::Two => exact,
            };
            json!({
                "protocol": est.protocol,
                "shots": est.shots,
                "seed": seed,
                "value": est.value,
                "std_error": est.std_error,
                "exact": target,
            })
        }
    };
    emit_json(&a.common, "amplitude.json", &value)
}

const THERMO_HEADER: &str =
    "beta,re_z,im_z,sigma_z,free_energy,sigma_free_energy,energy,sigma_energy,specific_heat,sigma_specific_heat\n";

fn thermo_row(out: &mut String, t: &Thermo) {
    writeln!(
        out,
        "{},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
        t.beta,
        t.z.re,
        t.z.im,
        t.sigma_z,
        t.free_energy,
        t.sigma_free_energy,
        t.energy,
        t.sigma_energy,
        t.specific_heat,
        t.sigma_specific_heat
    )
    .expect("string write");
}

fn cmd_reconstruct(a: &ReconstructArgs) -> Outcome<()> {
    let model: IsingModel = read_model(need(a.model.as_deref(), "--model")?)?;
    let betas = parse_range("--betas", &a.betas)?;
    if !(a.noise >= 0.0 && a.noise.is_finite()) {
        return Err(Failure::Usage(format!("--noise must be a finite σ ≥ 0, got {}", a.noise)));
    }
    let problem = DisorderedProblem::from_model(&model)?;
    let mut grid = problem.sample()?;
    if a.noise > 0.0 {
        grid = grid.with_noise(a.noise, seed_for(a.seed, "reconstruction with --noise")?)?;
    }
    let mut csv = String::from(THERMO_HEADER);
    for b in betas {
        thermo_row(&mut csv, &problem.thermo(&grid, b)?);
    }
    emit(&a.common, "reconstruct.csv", csv.as_bytes())
}

fn cmd_knot(a: &KnotArgs) -> Outcome<()> {
    let name = need(a.name.as_deref(), "--name")?;
    let q = need(a.q, "--q")?;
    let v = knot_invariant(name, q)?;
    emit_json(&a.common, "knot.json", &json!({ "name": name, "q": q, "value": v }))
}

fn parse_ops(text: &str) -> Outcome<Vec<TOperator>> {
    text.split(',')
        .enumerate()
        .map(|(s, tok)| {
            let tok = tok.trim();
            let (cp, zrot) = match tok {
                "-" | "" => (false, false),
                "c" => (true, false),
                "z" => (false, true),
                "cz" | "zc" => (true, true),
                _ => return Err(Failure::Usage(format!("--ops step {s}: expected -, c, z or cz, got {tok:?}"))),
            };
            Ok(TOperator::at(s, cp, zrot))
        })
        .collect()
}

fn cmd_bqp(a: &BqpArgs) -> Outcome<()> {
    let ops = parse_ops(need(a.ops.as_deref(), "--ops")?)?;
    let inst = circuit_to_ising(&ops, a.qubits)?;
    let k = a.nodes.unwrap_or_else(|| inst.node_count());
    let precision = if a.double { Precision::Double } else { Precision::Extended };
    let estimate = match a.eps {
        None => bqp::reconstruct_amplitude(&bqp::ExactOracle::new(&inst)?, &inst, k, precision)?,
        Some(eps) => {
            let seed = seed_for(a.seed, "a noisy oracle")?;
            bqp::reconstruct_amplitude(&bqp::NoisyOracle::new(&inst, eps, seed)?, &inst, k, precision)?
        }
    };
    let exact = t_amplitude(&ops, a.qubits)?;
    let report = json!({
        "qubits": a.qubits,
        "steps": ops.len(),
        "nodes": k,
        "precision": if a.double { "double" } else { "extended" },
        "value": estimate,
        "statevector": exact,
        "abs_error": (estimate - exact).norm(),
        "sidecar": inst.sidecar(),
    });
    if a.common.out.is_some() {
        emit_json(&a.common, "bqp_model.json", &serde_json::to_value(&inst.model).map_err(Error::from)?)?;
    }
    emit_json(&a.common, "bqp.json", &report)
}

fn cmd_fidelity(a: &FidelityArgs) -> Outcome<()> {
    let lattice = Lattice::chain(a.sites, a.periodic)?;
    let rows = fidelity_sweep(&lattice, a.j, &parse_range("--hperp", &a.hperp)?, a.dh)?;
    let mut body = Vec::new();
    write_sweep_csv(&rows, &mut body)?;
    emit(&a.common, "fidelity.csv", &body)
}

fn cmd_fpras(a: &FprasArgs) -> Outcome<()> {
    let model: IsingModel = read_model(need(a.model.as_deref(), "--model")?)?;
    let beta = need(a.beta, "--beta")?;
    let seed = seed_for(a.seed, "the estimator")?;
    let h = model.fields().first().copied().unwrap_or(0.0);
    if model.fields().iter().any(|&f| f != h) {
        return Err(Error::Unsupported("the estimator needs one uniform field".into()).into());
    }
    if model.couplings().iter().any(|&j| j < 0.0) && h != 0.0 {
        eprintln!("warning: antiferromagnetic bonds; the accuracy guarantee covers ferromagnets only");
    }
    let config = EstimatorConfig { eta: a.eta, samples: a.samples, ..EstimatorConfig::new(a.eps) };
    let run = estimate_partition(&fpras::ExactOracle, &model, beta, h, &config, seed)?;
    let exact = partition_function(&model, Complex64::new(beta, 0.0), Method::Enumerate).ok().map(|z| z.re);
    let mut value = serde_json::to_value(&run).map_err(Error::from)?;
    value["seed"] = json!(seed);
    value["z_exact"] = json!(exact);
    emit_json(&a.common, "fpras.json", &value)
}

type Check = (&'static str, Result<bool>);

fn report(checks: Vec<Check>) -> Outcome<()> {
    let mut failed = 0;
    for (name, r) in &checks {
        match r {
            Ok(true) => println!("ok    {name}"),
            Ok(false) => {
                failed += 1;
                println!("FAIL  {name}");
            }
            Err(e) => {
                failed += 1;
                println!("FAIL  {name}: {e}");
            }
        }
    }
    if failed > 0 {
        return Err(Error::InvalidArgument(format!("{failed} of {} self-checks failed", checks.len())).into());
    }
    Ok(())
}

fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
    (a - b).norm() <= tol * b.norm().max(1.0)
}

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn selftest_partition() -> Vec<Check> {
    let one = || IsingModel::uniform(Lattice::chain(1, false).unwrap(), 0.0, 1.0);
    let two = || IsingModel::uniform(Lattice::chain(2, false).unwrap(), 1.0, 0.0);
    vec![
        ("single spin energy", (|| Ok(one().energy(&SpinConfiguration::from_spins(&[1])?)? == -1.0))()),
        ("single bond energy", (|| Ok(two().energy(&SpinConfiguration::from_spins(&[1, 1])?)? == -1.0))()),
        ("beta zero counts states", (|| {
            let m = IsingModel::uniform(Lattice::grid(&[2, 3], &[false, false])?, 0.7, -0.3);
            Ok(partition_function(&m, re(0.0), Method::Enumerate)? == re(64.0))
        })()),
        ("single spin closed form", (|| {
            Ok(close(partition_function(&one(), re(1.0), Method::Enumerate)?, re(2.0 * 1f64.cosh()), 1e-12))
        })()),
        ("degeneracies of one and two spins", (|| {
            let a = xi_coefficients(&one())?;
            let b = xi_coefficients(&two())?;
            Ok(a.into_iter().collect::<Vec<_>>() == [(-1, 1), (1, 1)]
                && b.into_iter().collect::<Vec<_>>() == [(-1, 2), (1, 2)])
        })()),
        ("degeneracies sum to 2^16", (|| {
            let lat = Lattice::grid(&[4, 4], &[false, false])?;
            let j = (0..lat.edge_count()).map(|e| if e % 3 == 0 { -1.0 } else { 1.0 }).collect();
            let m = IsingModel::new(lat, j, vec![0.0; 16])?;
            Ok(xi_coefficients(&m)?.values().sum::<u64>() == 65536)
        })()),
        ("zero field magnetization", (|| {
            Ok(corner_magnetization(&two(), 0.8, &PinnedSet::new(), 0)?.abs() < 1e-12)
        })()),
        ("single spin magnetization", (|| {
            Ok((corner_magnetization(&one(), 1.0, &PinnedSet::new(), 0)? - 1f64.tanh()).abs() < 1e-12)
        })()),
    ]
}

fn selftest_amplitude() -> Vec<Check> {
    let chain = |n| Lattice::chain(n, false).unwrap();
    vec![
        ("empty program", (|| Ok(close(amplitude(&CircuitProgram::<f64>::empty(chain(3)))?, re(1.0), 1e-12)))()),
        ("alpha zero is the identity", (|| {
            let layer = DiagonalLayer { alpha: 0.0, couplings: vec![1.3], fields: vec![0.2, -0.4], offsets: vec![0.0; 2] };
            let p = CircuitProgram::new(chain(2), vec![Layer::Diagonal(layer)])?;
            Ok(close(amplitude(&p)?, re(1.0), 1e-12))
        })()),
        ("single qubit phase layer", (|| {
            let p = CircuitProgram::new(chain(1), vec![Layer::Phase(PhaseLayer { phi: vec![0.7] })])?;
            Ok(close(amplitude(&p)?, re(0.7f64.cos()), 1e-12))
        })()),
        ("swap test on equal states", (|| {
            let s = QuantumState::plus_x(2);
            let est = simulate_overlap(&s, &s, Protocol::One, 10_000, 1)?;
            Ok((est.value.re - 1.0).abs() <= 3.0 / 100.0)
        })()),
        ("swap test on orthogonal states", (|| {
            let est = simulate_overlap(&QuantumState::basis(2, 0)?, &QuantumState::basis(2, 3)?, Protocol::One, 10_000, 2)?;
            Ok(est.value.re.abs() <= 3.0 / 100.0)
        })()),
        ("outcome frequencies", (|| {
            Ok(estimate_p(&[1, 1, 1])? == 0.0 && estimate_p(&[-1, -1])? == 1.0 && estimate_p(&[1, -1])? == 0.5)
        })()),
        ("moment estimates", (|| Ok(moment_estimates(0.0)? == (0.0, 0.0) && moment_estimates(0.5)? == (1.0, 1.0)))()),
        ("zero confidence needs one shot", (|| Ok(hoeffding_m(0.1, 0.0)? == 1))()),
    ]
}

fn selftest_reconstruct() -> Vec<Check> {
    vec![
        ("kernel at zero", Ok(close(kernel_w(4, re(0.0)), re(1.0), 1e-12))),
        ("kernel grid zero", Ok(kernel_w(3, re(2.0 * PI / 7.0)).norm() < 1e-12)),
        ("no rotation at beta zero", Ok(wick_alpha(0.0) == re(0.0))),
        ("beta zero counts states", (|| {
            let m = IsingModel::uniform(Lattice::grid(&[2, 2], &[false, false])?, 1.0, 0.0);
            let p = DisorderedProblem::from_model(&m)?;
            Ok(close(p.reconstruct(&p.sample()?, 0.0)?.0, re(16.0), 1e-9))
        })()),
        ("symmetric two-spin degeneracies", (|| {
            let m = IsingModel::uniform(Lattice::grid(&[1, 2], &[false, false])?, 1.0, 0.0);
            let p = DisorderedProblem::from_model(&m)?;
            let est = p.xi_with_errors(&p.sample()?, 0.0)?;
            let at = |k: i64| est.k.iter().position(|&x| x == k).map(|i| est.xi[i]);
            Ok(at(-1).is_some_and(|x| (x - 2.0).abs() < 1e-9) && at(1).is_some_and(|x| (x - 2.0).abs() < 1e-9))
        })()),
    ]
}

fn selftest_knot() -> Vec<Check> {
    vec![
        ("single positive edge", (|| {
            let g = SignedGraph::new("edge", 2, vec![(0, 1)], vec![1])?;
            let b = 0.3;
            Ok(close(potts_partition(&g, PottsParams { q: 2, beta: re(b) })?, re(2.0 * b.exp() + 2.0), 1e-12))
        })()),
        ("one Potts state", (|| {
            let g = SignedGraph::new("mixed", 3, vec![(0, 1), (1, 2), (0, 2)], vec![1, 1, -1])?;
            let b = Complex64::new(0.2, 0.7);
            Ok(close(potts_partition(&g, PottsParams { q: 1, beta: b })?, b.exp(), 1e-12))
        })()),
    ]
}

fn selftest_bqp() -> Vec<Check> {
    vec![
        ("zero circuit has unit amplitude", (|| {
            let inst = circuit_to_ising(&[TOperator::at(0, false, false)], 2)?;
            let a = bqp::reconstruct_amplitude(&bqp::ExactOracle::new(&inst)?, &inst, inst.node_count(), Precision::Extended)?;
            Ok(close(a, re(1.0), 1e-9))
        })()),
        ("node bound is monotone", Ok(mprime_bound(1, 2) < mprime_bound(2, 2) && mprime_bound(2, 2) < mprime_bound(2, 3))),
        ("constant data interpolates to a constant", (|| {
            let nodes: Vec<_> = (0..4).map(|j| (re(j as f64 / 4.0), Complex64::new(2.5, -1.0))).collect();
            Ok(close(lagrange_estimate(&nodes, Complex64::new(0.3, 0.9))?, Complex64::new(2.5, -1.0), 1e-12))
        })()),
        ("zero angle compiles to the identity", (|| {
            let seq = compile_logical(&LogicalGate::Z { k: 1, alpha: 0.0 }, 2)?;
            let d = phase_distance(4, |s| bqp::apply_sequence(s, &seq), |_| Ok(()))?;
            Ok(d < 1e-9)
        })()),
        ("tolerance bounds are finite", (|| {
            let d = required_delta(2, 3, 0.5)?;
            Ok(d.ln_delta.is_finite() && d.ln_asymptotic.is_finite())
        })()),
    ]
}

fn selftest_fidelity() -> Vec<Check> {
    let params = |hp: f64| QuantumIsingParams::new(hp, 1.0, 0.0, Lattice::chain(2, false).unwrap()).unwrap();
    vec![
        ("identical ground states", (|| Ok((ground_state_fidelity(&params(0.8), &params(0.8))? - 1.0).abs() < 1e-8))()),
        ("halving the gap scales the time by 16", Ok({
            let p = params(1.0);
            (adiabatic_time(&p, 0.1, 0.5) / adiabatic_time(&p, 0.1, 1.0) - 16.0).abs() < 1e-9
        })),
        ("identical plans overlap to one", (|| {
            let p = params(1.0);
            let plan = AdiabaticPlan::with_time(&p, 1.2, 2, 0.1, 1.0, 1.0)?;
            Ok(close(overlap_instance(&p, &plan, &p, &plan)?.overlap(), re(1.0), 1e-8))
        })()),
    ]
}

fn selftest_fpras() -> Vec<Check> {
    let free = |n: usize| IsingModel::uniform(Lattice::chain(n, false).unwrap(), 0.0, 0.0);
    vec![
        ("equal field spacings", (|| {
            let s = schedule(0.7, 0.5, 9, 1.0)?;
            Ok(s.fields.windows(2).all(|w| (w[1] - w[0] - s.dh).abs() < 1e-12))
        })()),
        ("doubling eta halves the steps", (|| Ok(schedule(1.0, 1.0, 8, 2.0)?.steps * 2 == schedule(1.0, 1.0, 8, 1.0)?.steps))()),
        ("larger delta needs fewer samples", (|| Ok(sample_count(3, 1.0, 0.5)? < sample_count(3, 1.0, 0.1)?))()),
        ("finesse grows with the bias share", (|| Ok(finesse_bound(9, 1.0, 0.05)? < finesse_bound(9, 1.0, 0.1)?))()),
        ("infinite temperature is uniform", (|| {
            let m = free(3);
            let p = sampling_distribution(&fpras::ExactOracle, &m, 0.0, &snake_order(m.lattice()))?;
            Ok(p.iter().all(|x| (x - 0.125).abs() < 1e-12))
        })()),
        ("strong field aligns every spin", (|| {
            let m = IsingModel::uniform(Lattice::chain(3, false)?, 0.0, 5.0);
            let draws = sequential_samples(&fpras::ExactOracle, &m, 5.0, &snake_order(m.lattice()), 1000, 3)?;
            Ok(draws.iter().all(|c| c.bits() == 0))
        })()),
    ]
}
