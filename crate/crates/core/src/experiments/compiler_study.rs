use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::table::{ResultTable, DIMENSIONLESS};
use crate::compiler::{
    effective_generator, exact_unitary, group_commutator_gadget, phase_aligned_distance,
    product_state_fidelities, qnd_four_step, sequence_to_unitary, synth_x3, synth_x3z,
    trotter_compose, unitarity_deviation, Generator, PolynomialHamiltonian, PulseSequence,
    SynthOptions, TrotterOrder,
};
use crate::error::{Error, Result};
use crate::numerics::{logspace, loglog_slope, seeded_rng, DEFAULT_SEED};
use crate::spin::operator::dense_max_abs;
use crate::spin::{build_collective_ops, mode_ops, Space, SpinOperator, SpinSystem, C64};

fn default_identity_atoms() -> Vec<u64> {
    vec![1, 6, 10, 20, 40]
}

fn default_pair_atoms() -> Vec<u64> {
    vec![1, 2, 4, 6, 8, 10]
}

fn default_gadget_steps() -> Vec<f64> {
    logspace(1e-3, 1e-1, 7)
}

fn default_trotter_steps() -> Vec<u64> {
    vec![10, 16, 25, 40, 63, 100]
}

fn default_chi_tau() -> Vec<f64> {
    vec![1e-4, 1e-3, 1e-2, 1e-1, 1.0]
}

fn default_synth_steps() -> Vec<f64> {
    vec![0.1, 0.05, 0.02, 0.01]
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

fn six() -> u64 {
    6
}

fn four() -> u64 {
    4
}

fn ten() -> u64 {
    10
}

fn eight() -> u64 {
    8
}

fn states() -> usize {
    10
}

fn synth_time() -> f64 {
    1e-2
}

fn default_pair() -> Generator {
    Generator::Pair {
        modes: [0, 1],
        omega: 0.5,
        transmissivity: 0.5,
        chi: 1.0,
    }
}

/// Identity checks and convergence studies of the compiler.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompilerStudyConfig {
    #[serde(default = "default_identity_atoms")]
    pub identity_atoms: Vec<u64>,
    #[serde(default = "default_pair_atoms")]
    pub pair_atoms: Vec<u64>,
    #[serde(default = "six")]
    pub gadget_atoms: u64,
    #[serde(default = "default_gadget_steps")]
    pub gadget_steps: Vec<f64>,
    #[serde(default = "four")]
    pub trotter_atoms: u64,
    #[serde(default = "default_trotter_steps")]
    pub trotter_repetitions: Vec<u64>,
    #[serde(default = "ten")]
    pub qnd_atoms: u64,
    #[serde(default = "default_pair")]
    pub qnd_pair: Generator,
    #[serde(default = "default_chi_tau")]
    pub qnd_chi_tau: Vec<f64>,
    #[serde(default = "states")]
    pub qnd_states: usize,
    #[serde(default = "eight")]
    pub x3_atoms: u64,
    #[serde(default = "four")]
    pub x3z_atoms: u64,
    #[serde(default = "synth_time")]
    pub synth_time: f64,
    #[serde(default = "default_synth_steps")]
    pub synth_steps: Vec<f64>,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

impl Default for CompilerStudyConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all fields have defaults")
    }
}

fn comm(a: &SpinOperator, b: &SpinOperator) -> SpinOperator {
    &(a * b) - &(b * a)
}

fn anti(a: &SpinOperator, b: &SpinOperator) -> SpinOperator {
    &(a * b) + &(b * a)
}

/// `max |X^3 - (i/4)[Z^2-Y^2, YZ+ZY] - (i/4)[XZ+ZX, XY+YX] - X/4|`, from
/// operator matrices only.
pub fn x3_identity_residual(atoms: u64) -> Result<f64> {
    let o = build_collective_ops(SpinSystem::new(atoms)?);
    let (x, y, z) = (&o.x, &o.y, &o.z);
    let lhs = &(x * x) * x;
    let a = &(z * z) - &(y * y);
    let quarter_i = C64::new(0.0, 0.25);
    let rhs = &(&comm(&a, &anti(y, z)).scale(quarter_i) + &comm(&anti(x, z), &anti(x, y)).scale(quarter_i))
        + &x.scale_real(0.25);
    lhs.max_abs_diff(&rhs)
}

/// `max |X_1^3 Z_2 - X_1 Z_2/4 - (1/4)[Z_1^2-Y_1^2, [Z_1^2, X_1 Z_2]]
/// + (1/4)[X_1 Z_1 + Z_1 X_1, [X_1^2, Z_1 Z_2]]|` at `N_1 = N_2 = atoms`.
pub fn x3z_identity_residual(atoms: u64) -> Result<f64> {
    let s = SpinSystem::new(atoms)?;
    let space = Space::pair(s, s);
    let (a, b) = (mode_ops(&space, 0)?, mode_ops(&space, 1)?);
    let (x1, y1, z1, z2) = (&a.x, &a.y, &a.z, &b.z);
    let x1z2 = x1 * z2;
    let lhs = &(&(x1 * x1) * x1) * z2;
    let z1sq = z1 * z1;
    let t2 = comm(&(&z1sq - &(y1 * y1)), &comm(&z1sq, &x1z2));
    let t3 = comm(&anti(x1, z1), &comm(&(x1 * x1), &(z1 * z2)));
    let rhs = &(&x1z2.scale_real(0.25) + &t2.scale_real(0.25)) - &t3.scale_real(0.25);
    lhs.max_abs_diff(&rhs)
}

pub struct CompilerStudy {
    /// `(identity, N, residual)`; identity 0 is the `X^3` form, 1 the `X_1^3 Z_2` form.
    pub identities: ResultTable,
    /// `(dt, unitary deviation, generator deviation)` of the `(X, Y)` gadget.
    pub gadget: ResultTable,
    /// `(n, first-order deviation, second-order deviation)` for `X + Z`.
    pub trotter: ResultTable,
    /// `(chi tau, min fidelity, mean fidelity, unitarity deviation)`.
    pub qnd: ResultTable,
    /// `(target, dt, phase-aligned distance, unitarity deviation)`; target 0 is
    /// `X^3`, 1 is `X_1^3 Z_2`.
    pub synthesis: ResultTable,
    pub gadget_slope: f64,
    pub trotter_slope: f64,
}

fn slope_or_nan(x: &[f64], y: &[f64]) -> f64 {
    loglog_slope(x, y).unwrap_or(f64::NAN)
}

pub fn gadget_convergence(atoms: u64, steps: &[f64]) -> Result<Vec<(f64, f64, f64)>> {
    let space = Space::single(SpinSystem::new(atoms)?);
    let z = build_collective_ops(space.mode(0)?).z;
    let x = Generator::linear(0, [1.0, 0.0, 0.0]);
    let y = Generator::linear(0, [0.0, 1.0, 0.0]);
    steps
        .par_iter()
        .map(|&dt| {
            let u = sequence_to_unitary(&group_commutator_gadget(&x, &y, dt)?, &space)?;
            let exact = exact_unitary(&z, dt * dt)?;
            let h = effective_generator(&u, &space, dt * dt)?;
            Ok((dt, dense_max_abs(&(&u - &exact)), h.max_abs_diff(&z)?))
        })
        .collect()
}

pub fn trotter_convergence(atoms: u64, reps: &[u64]) -> Result<Vec<(u64, f64, f64)>> {
    let space = Space::single(SpinSystem::new(atoms)?);
    let target: PolynomialHamiltonian = "X + Z".parse()?;
    let exact = exact_unitary(&target.materialize(&space)?, 1.0)?;
    let parts = [
        PulseSequence::single(Generator::linear(0, [1.0, 0.0, 0.0]), 1.0)?,
        PulseSequence::single(Generator::linear(0, [0.0, 0.0, 1.0]), 1.0)?,
    ];
    reps.par_iter()
        .map(|&n| {
            let dev = |order| -> Result<f64> {
                let u = sequence_to_unitary(&trotter_compose(&parts, n, order)?, &space)?;
                Ok(dense_max_abs(&(&u - &exact)))
            };
            Ok((n, dev(TrotterOrder::First)?, dev(TrotterOrder::Second)?))
        })
        .collect()
}

/// Fidelities of the four-step against `exp(+i 2 chi Z_1 Z_2 tau)` on
/// seeded random product states: `(min, mean, unitarity deviation)`.
pub fn qnd_fidelity(atoms: u64, pair: &Generator, chi_tau: f64, states: usize, seed: u64) -> Result<(f64, f64, f64)> {
    let Generator::Pair { chi, .. } = pair else {
        return Err(Error::Config("qnd_pair must be a pair generator".into()));
    };
    if *chi == 0.0 {
        return Err(Error::Config("qnd_pair needs a non-zero chi".into()));
    }
    let s = SpinSystem::new(atoms)?;
    let space = Space::pair(s, s);
    let tau = chi_tau / chi;
    let u = sequence_to_unitary(&qnd_four_step(pair, tau)?, &space)?;
    let exact = exact_unitary(&Generator::qnd(0, 1, -2.0 * chi).materialize(&space)?, tau)?;
    let mut rng = seeded_rng(seed);
    let f = product_state_fidelities(&u, &exact, &space, states, &mut rng);
    let min = f.iter().copied().fold(1.0, f64::min);
    let mean = f.iter().sum::<f64>() / f.len().max(1) as f64;
    Ok((min, mean, unitarity_deviation(&u)))
}

/// Phase-aligned distance of the synthesized `X^3` (target 0) or
/// `X_1^3 Z_2` (target 1) sequence from the exact exponential.
pub fn synthesis_error(target: usize, atoms: u64, dt: f64, time: f64) -> Result<(f64, f64)> {
    let s = SpinSystem::new(atoms)?;
    let (space, seq, expr) = if target == 0 {
        (Space::single(s), synth_x3(0, 1.0, dt, time, SynthOptions::default())?, "X^3")
    } else {
        (Space::pair(s, s), synth_x3z([0, 1], 1.0, dt, time, SynthOptions::default())?, "X1^3 Z2")
    };
    let expr: PolynomialHamiltonian = expr.parse()?;
    let exact = exact_unitary(&expr.materialize(&space)?, time)?;
    let u = sequence_to_unitary(&seq, &space)?;
    Ok((phase_aligned_distance(&u, &exact), unitarity_deviation(&u)))
}

pub fn run_compiler_verification(config: &CompilerStudyConfig) -> Result<CompilerStudy> {
    let mut identities = ResultTable::new(
        "compiler-identities",
        &[("identity", DIMENSIONLESS), ("N", DIMENSIONLESS), ("residual", DIMENSIONLESS)],
    )
    .with_config(config)?;
    let single = config
        .identity_atoms
        .par_iter()
        .map(|&n| Ok(vec![0.0, n as f64, x3_identity_residual(n)?]))
        .collect::<Result<Vec<_>>>()?;
    let pairs = config
        .pair_atoms
        .par_iter()
        .map(|&n| Ok(vec![1.0, n as f64, x3z_identity_residual(n)?]))
        .collect::<Result<Vec<_>>>()?;
    let mut worst = 0.0f64;
    for r in single.into_iter().chain(pairs) {
        worst = worst.max(r[2]);
        identities.push(r)?;
    }
    identities.summarize("max_residual", worst)?;

    let mut gadget = ResultTable::new(
        "compiler-gadget",
        &[("dt", "1/|H|"), ("unitary_deviation", DIMENSIONLESS), ("generator_deviation", "|H|")],
    )
    .with_config(config)?;
    let g = gadget_convergence(config.gadget_atoms, &config.gadget_steps)?;
    for &(dt, du, dh) in &g {
        gadget.push(vec![dt, du, dh])?;
    }
    let dts: Vec<f64> = g.iter().map(|r| r.0).collect();
    let gadget_slope = slope_or_nan(&dts, &g.iter().map(|r| r.1).collect::<Vec<_>>());
    gadget.summarize("unitary_slope", gadget_slope)?;
    gadget.summarize(
        "generator_slope",
        slope_or_nan(&dts, &g.iter().map(|r| r.2).collect::<Vec<_>>()),
    )?;

    let mut trotter = ResultTable::new(
        "compiler-trotter",
        &[("n", DIMENSIONLESS), ("first_order", DIMENSIONLESS), ("second_order", DIMENSIONLESS)],
    )
    .with_config(config)?;
    let tr = trotter_convergence(config.trotter_atoms, &config.trotter_repetitions)?;
    for &(n, a, b) in &tr {
        trotter.push(vec![n as f64, a, b])?;
    }
    let ns: Vec<f64> = tr.iter().map(|r| r.0 as f64).collect();
    let trotter_slope = slope_or_nan(&ns, &tr.iter().map(|r| r.2).collect::<Vec<_>>());
    trotter.summarize("second_order_slope", trotter_slope)?;
    trotter.summarize(
        "first_order_slope",
        slope_or_nan(&ns, &tr.iter().map(|r| r.1).collect::<Vec<_>>()),
    )?;

    let mut qnd = ResultTable::new(
        "compiler-qnd",
        &[
            ("chi_tau", DIMENSIONLESS),
            ("min_fidelity", DIMENSIONLESS),
            ("mean_fidelity", DIMENSIONLESS),
            ("unitarity_deviation", DIMENSIONLESS),
        ],
    )
    .with_config(config)?;
    qnd.metadata.seed = Some(config.seed);
    let q = config
        .qnd_chi_tau
        .par_iter()
        .map(|&ct| qnd_fidelity(config.qnd_atoms, &config.qnd_pair, ct, config.qnd_states, config.seed))
        .collect::<Result<Vec<_>>>()?;
    for (&ct, (min, mean, dev)) in config.qnd_chi_tau.iter().zip(q) {
        qnd.push(vec![ct, min, mean, dev])?;
    }

    let mut synthesis = ResultTable::new(
        "compiler-synthesis",
        &[
            ("target", DIMENSIONLESS),
            ("dt", "1/|H|"),
            ("distance", DIMENSIONLESS),
            ("unitarity_deviation", DIMENSIONLESS),
        ],
    )
    .with_config(config)?;
    let jobs: Vec<(usize, u64, f64)> = config
        .synth_steps
        .iter()
        .map(|&dt| (0, config.x3_atoms, dt))
        .chain(config.synth_steps.iter().map(|&dt| (1, config.x3z_atoms, dt)))
        .collect();
    let s = jobs
        .par_iter()
        .map(|&(k, n, dt)| synthesis_error(k, n, dt, config.synth_time))
        .collect::<Result<Vec<_>>>()?;
    for (&(k, _, dt), (d, u)) in jobs.iter().zip(s) {
        synthesis.push(vec![k as f64, dt, d, u])?;
    }

    Ok(CompilerStudy {
        identities,
        gadget,
        trotter,
        qnd,
        synthesis,
        gadget_slope,
        trotter_slope,
    })
}
