use std::fs;
use std::path::Path;

use log::info;
use qcv_core::compiler::{
    exact_unitary, lower, phase_aligned_distance, product_state_fidelities, sequence_to_unitary, synth_x3,
    synth_x3z, unitarity_deviation, Axis, CommutatorScheme, PolynomialHamiltonian, PulseSequence, SynthOptions,
};
use qcv_core::experiments::{
    load_config, run_compiler_verification, run_fig2, run_info_content, run_network_sweep, run_ops_check,
    run_overlap_study, run_selectivity, run_squeeze_protocols, CompilerStudyConfig, Fig2Config, InfoInput,
    NetworkSweepConfig, OverlapConfig, SelectivityConfig, SqueezeConfig, SqueezeProtocol,
};
use qcv_core::network::NetworkSpec;
use qcv_core::numerics::seeded_rng;
use qcv_core::spin::Space;
use qcv_core::{Error, ResultTable, Result};
use serde_json::json;

use crate::Outcome;

/// Unitarity budget for `verify`.
const UNITARITY_TOLERANCE: f64 = 1e-10;
/// Linear-system residual above which a network solve is not trusted.
const NETWORK_RESIDUAL_TOLERANCE: f64 = 1e-8;

fn print_json(value: &serde_json::Value) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

/// Saves `stem.csv` and `stem.json` under `out`, or streams the CSV to
/// stdout.
fn emit(table: &ResultTable, out: Option<&Path>, stem: &str) -> Result<()> {
    match out {
        Some(dir) => {
            let (csv, meta) = table.save(dir, stem)?;
            println!("{}\n{}", csv.display(), meta.display());
        }
        None => table.write_csv(std::io::stdout().lock())?,
    }
    Ok(())
}

pub fn ops_check(n: u64) -> Result<Outcome> {
    let report = run_ops_check(n)?;
    print_json(&serde_json::to_value(&report)?)?;
    Ok(if report.pass {
        Outcome::Ok
    } else {
        Outcome::Invalid(format!(
            "commutator deviation {:.3e}, Casimir deviation {:.3e} exceed {:.0e}",
            report.commutator_deviation, report.casimir_deviation, report.tolerance
        ))
    })
}

pub fn fig2(config: &Path, out: &Path) -> Result<Outcome> {
    let cfg: Fig2Config = load_config(config)?;
    let result = run_fig2(&cfg)?;
    emit(&result.map, Some(out), "fig2_map")?;
    emit(&result.inset, Some(out), "fig2_inset")?;
    for l in &result.linearity {
        info!("L dk = {} T: inset linearity residual {:.3}% of range", l.detuning, 100.0 * l.fraction());
    }
    Ok(Outcome::Ok)
}

pub fn overlap(config: &Path, out: Option<&Path>) -> Result<Outcome> {
    let cfg: OverlapConfig = load_config(config)?;
    emit(&run_overlap_study(&cfg)?, out, "overlap")?;
    Ok(Outcome::Ok)
}

pub fn info(n: Option<f64>, r: Option<f64>, sq: Option<f64>) -> Result<Outcome> {
    let report = run_info_content(&InfoInput {
        atoms: n,
        r,
        squeezing_db: sq,
    })?;
    for w in &report.warnings {
        log::warn!("{w}");
    }
    print_json(&serde_json::to_value(&report)?)?;
    Ok(Outcome::Ok)
}

pub fn squeeze(
    protocol: SqueezeProtocol,
    n: u64,
    points: usize,
    t_max: Option<f64>,
    out: Option<&Path>,
) -> Result<Outcome> {
    let cfg = SqueezeConfig {
        time_points: points,
        t_max,
        ..SqueezeConfig::new(protocol, n)
    };
    emit(&run_squeeze_protocols(&cfg)?, out, "squeeze")?;
    Ok(Outcome::Ok)
}

/// `c X_k^3` or `c X_a^3 Z_b` as a single term, if `expr` is one.
enum Special {
    Cubic(usize, f64),
    CubicZ([usize; 2], f64),
}

fn special_form(expr: &PolynomialHamiltonian) -> Option<Special> {
    let terms = expr.terms();
    let [(word, c)] = terms.as_slice() else {
        return None;
    };
    if c.im != 0.0 {
        return None;
    }
    let is = |i: usize, mode: usize, axis: Axis| word[i].mode == mode && word[i].axis == axis;
    match word.len() {
        3 if (0..3).all(|i| is(i, word[0].mode, Axis::X)) => Some(Special::Cubic(word[0].mode, c.re)),
        4 => {
            let (a, b) = (word[0].mode, word[3].mode);
            let x3 = (0..3).all(|i| is(i, a, Axis::X));
            (x3 && a != b && word[3].axis == Axis::Z).then_some(Special::CubicZ([a, b], c.re))
        }
        _ => None,
    }
}

pub fn compile(target: &str, dt: f64, time: f64, scheme: CommutatorScheme, out: &Path) -> Result<Outcome> {
    let expr: PolynomialHamiltonian = target.parse()?;
    let opts = SynthOptions {
        scheme,
        ..SynthOptions::default()
    };
    let seq = match special_form(&expr) {
        Some(Special::Cubic(mode, c)) => synth_x3(mode, c, dt, time, opts)?,
        Some(Special::CubicZ(modes, c)) => synth_x3z(modes, c, dt, time, opts)?,
        None => lower(&expr, time, dt)?,
    };
    fs::write(out, serde_json::to_string_pretty(&seq)?)?;
    print_json(&json!({
        "target": expr.to_string(),
        "method": seq.metadata.method,
        "steps": seq.step_count().to_string(),
        "duration": seq.total_duration(),
        "modes": seq.num_modes(),
        "out": out.display().to_string(),
    }))?;
    Ok(Outcome::Ok)
}

pub fn verify(path: &Path, atoms: &[u64], states: usize, seed: u64, tolerance: Option<f64>) -> Result<Outcome> {
    let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let seq: PulseSequence =
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    seq.validate()?;
    let target = seq.metadata.target.clone();
    let modes = seq
        .num_modes()
        .max(target.as_ref().map_or(0, PolynomialHamiltonian::num_modes))
        .max(1);
    let atoms = match atoms {
        [n] => vec![*n; modes],
        list if list.len() == modes => list.to_vec(),
        list => {
            return Err(Error::Config(format!(
                "sequence acts on {modes} mode(s) but {} atom numbers were given",
                list.len()
            )))
        }
    };
    let space = Space::from_atoms(&atoms)?;
    let u = sequence_to_unitary(&seq, &space)?;
    let udev = unitarity_deviation(&u);
    let mut report = json!({
        "atoms": atoms,
        "dim": space.dim(),
        "steps": seq.step_count().to_string(),
        "unitarity_deviation": udev,
    });
    let mut distance = None;
    if let Some(target) = &target {
        let time = seq.metadata.simulated_time.unwrap_or(1.0);
        let exact = exact_unitary(&target.materialize(&space)?, time)?;
        let d = phase_aligned_distance(&u, &exact);
        let f = product_state_fidelities(&u, &exact, &space, states, &mut seeded_rng(seed));
        let min = f.iter().copied().fold(1.0, f64::min);
        let mean = f.iter().sum::<f64>() / f.len().max(1) as f64;
        report["target"] = json!(target.to_string());
        report["time"] = json!(time);
        report["distance"] = json!(d);
        report["min_fidelity"] = json!(min);
        report["mean_fidelity"] = json!(mean);
        report["seed"] = json!(seed);
        distance = Some(d);
    }
    print_json(&report)?;
    if udev > UNITARITY_TOLERANCE {
        return Ok(Outcome::Invalid(format!("unitarity deviation {udev:.3e} > {UNITARITY_TOLERANCE:.0e}")));
    }
    match (tolerance, distance) {
        (Some(tol), Some(d)) if d > tol => Ok(Outcome::Invalid(format!("distance {d:.3e} > {tol:.3e}"))),
        (Some(_), None) => Err(Error::Config("--tolerance needs a sequence with a target".into())),
        _ => Ok(Outcome::Ok),
    }
}

pub fn network(spec: &Path, sweep: &Path, out: Option<&Path>) -> Result<Outcome> {
    let spec: NetworkSpec = load_config(spec)?;
    let sweep: NetworkSweepConfig = load_config(sweep)?;
    let table = run_network_sweep(&spec, &sweep)?;
    emit(&table, out, "network")?;
    let worst = table.column("residual").unwrap_or_default().into_iter().fold(0.0, f64::max);
    Ok(if worst > NETWORK_RESIDUAL_TOLERANCE {
        Outcome::Invalid(format!("linear-system residual {worst:.3e}"))
    } else {
        Outcome::Ok
    })
}

pub fn selectivity(config: &Path, out: Option<&Path>) -> Result<Outcome> {
    let cfg: SelectivityConfig = load_config(config)?;
    let (table, report) = run_selectivity(&cfg)?;
    emit(&table, out, "selectivity")?;
    info!("worst off-target ratio {:.3e}, all pass: {}", report.worst_ratio(), report.all_pass());
    Ok(Outcome::Ok)
}

pub fn compiler_study(config: Option<&Path>, out: &Path) -> Result<Outcome> {
    let cfg: CompilerStudyConfig = match config {
        Some(p) => load_config(p)?,
        None => CompilerStudyConfig::default(),
    };
    let study = run_compiler_verification(&cfg)?;
    for (table, stem) in [
        (&study.identities, "identities"),
        (&study.gadget, "gadget"),
        (&study.trotter, "trotter"),
        (&study.qnd, "qnd"),
        (&study.synthesis, "synthesis"),
    ] {
        emit(table, Some(out), stem)?;
    }
    info!("gadget slope {:.3}, Trotter slope {:.3}", study.gadget_slope, study.trotter_slope);
    Ok(Outcome::Ok)
}
