use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::table::{ResultTable, DIMENSIONLESS};
use crate::error::{Error, Result};
use crate::network::{
    effective_classical_hamiltonian, five_cavity_selectivity_report, pair_grid, solve_steady_state,
    AtomCoupling, CavityTemplate, DetuningSchedule, NetworkSpec, SelectivityReport,
    DEFAULT_SELECTIVITY_THRESHOLD,
};

/// The knob varied by a sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SweepParameter {
    /// Wave-number detuning `Delta k` (1/m) of the cavity holding `mode`.
    Detuning { mode: usize },
    /// One-way phase (rad) of the edge touching `endpoint`.
    EdgePhase { endpoint: String },
    /// Atom-induced round-trip phase (rad) of ensemble `mode`.
    AtomPhase { mode: usize },
}

impl SweepParameter {
    fn unit(&self) -> &'static str {
        match self {
            SweepParameter::Detuning { .. } => "1/m",
            _ => "rad",
        }
    }
}

/// Quadratic-Hamiltonian fit repeated at every sweep value.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepFit {
    pub coupling: AtomCoupling,
    /// Half-width of the `Z` grid.
    pub half_width: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSweepConfig {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
    /// Fixed atom phases, per ensemble; missing entries are zero.
    #[serde(default)]
    pub atom_phases: Vec<f64>,
    #[serde(default)]
    pub fit: Option<SweepFit>,
}

/// Steady state at every value: output power, input return, linear-system
/// residual and each cavity's gain; with `fit`, also the fitted `omega_j`,
/// the `Z_j Z_k` coefficients and the fit residual.
pub fn run_network_sweep(spec: &NetworkSpec, config: &NetworkSweepConfig) -> Result<ResultTable> {
    spec.validate()?;
    if config.values.is_empty() || config.values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Config("sweep needs at least one finite value".into()));
    }
    let modes = spec.modes();
    let unit = config.parameter.unit();
    let mut cols: Vec<(String, String)> = vec![
        ("value".into(), unit.into()),
        ("output_power".into(), DIMENSIONLESS.into()),
        ("input_return".into(), DIMENSIONLESS.into()),
        ("residual".into(), DIMENSIONLESS.into()),
    ];
    cols.extend(modes.iter().map(|m| (format!("gain{m}"), DIMENSIONLESS.to_string())));
    if config.fit.is_some() {
        cols.extend(modes.iter().map(|m| (format!("omega{m}"), "rad/s".to_string())));
        for (a, &j) in modes.iter().enumerate() {
            for &k in &modes[a..] {
                cols.push((format!("q{j}{k}"), "rad/s".into()));
            }
        }
        cols.push(("fit_residual".into(), "rad/s".into()));
    }
    let refs: Vec<(&str, &str)> = cols.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
    let mut table = ResultTable::new("network-sweep", &refs).with_config(config)?;
    table.metadata.config = serde_json::json!({ "sweep": config, "spec": spec });
    let n_modes = modes.iter().max().map_or(0, |m| m + 1);

    let rows = config
        .values
        .par_iter()
        .map(|&v| {
            let mut s = spec.clone();
            let mut phases = config.atom_phases.clone();
            match &config.parameter {
                SweepParameter::Detuning { mode } => s.set_detuning(*mode, v)?,
                SweepParameter::EdgePhase { endpoint } => s.set_edge_phase(endpoint, v)?,
                SweepParameter::AtomPhase { mode } => {
                    if phases.len() <= *mode {
                        phases.resize(mode + 1, 0.0);
                    }
                    phases[*mode] = v;
                }
            }
            let sol = solve_steady_state(&s, &phases)?;
            let mut row = vec![v, sol.output_power, sol.input_return.norm_sqr(), sol.residual];
            row.extend(modes.iter().map(|&m| sol.gain(m).unwrap_or(0.0)));
            if let Some(fit) = &config.fit {
                let h = effective_classical_hamiltonian(&s, &pair_grid(n_modes, fit.half_width), &fit.coupling)?;
                row.extend(modes.iter().map(|&m| h.linear(m).unwrap_or(0.0)));
                for (a, &j) in modes.iter().enumerate() {
                    for &k in &modes[a..] {
                        row.push(h.monomial(j, k).unwrap_or(0.0));
                    }
                }
                row.push(h.max_residual);
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    for r in rows {
        table.push(r)?;
    }
    Ok(table)
}

fn default_threshold() -> f64 {
    DEFAULT_SELECTIVITY_THRESHOLD
}

/// Pair selectivity of the five-cavity network.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelectivityConfig {
    pub cavity: CavityTemplate,
    pub coupling: AtomCoupling,
    #[serde(default)]
    pub schedule: DetuningSchedule,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
}

impl SelectivityConfig {
    /// Rb cavity of the two-cavity example, `P_0 = 12 nW` at 780 nm.
    pub fn reference() -> Self {
        Self {
            cavity: CavityTemplate {
                mirror_transmissivity: 5e-3,
                roundtrip_loss: 1.2e-6,
                cavity_length: 0.026,
                detuning: 0.0,
            },
            coupling: AtomCoupling {
                wavelength_ratio: 1e-2,
                linewidth_ratio: crate::optics::params::rb85_linewidth_ratio(),
                photon_rate: 12e-9 * crate::optics::params::RB85_WAVELENGTH
                    / (crate::optics::params::PLANCK * crate::optics::params::SPEED_OF_LIGHT),
            },
            schedule: DetuningSchedule::default(),
            threshold: DEFAULT_SELECTIVITY_THRESHOLD,
        }
    }
}

/// One row per target pair: `(j, k, chi_jk, worst off-target, its indices,
/// ratio, pass)`; the full report rides along.
pub fn run_selectivity(config: &SelectivityConfig) -> Result<(ResultTable, SelectivityReport)> {
    let report = five_cavity_selectivity_report(config.cavity, &config.coupling, &config.schedule, config.threshold)?;
    let mut table = ResultTable::new(
        "five-cavity-selectivity",
        &[
            ("j", DIMENSIONLESS),
            ("k", DIMENSIONLESS),
            ("target_coefficient", "rad/s"),
            ("worst_off_target", "rad/s"),
            ("worst_j", DIMENSIONLESS),
            ("worst_k", DIMENSIONLESS),
            ("ratio", DIMENSIONLESS),
            ("pass", DIMENSIONLESS),
        ],
    )
    .with_config(config)?;
    table.assume(format!(
        "selectivity threshold {} is a reporting choice; the schedule puts the targets at L dk = {} T and the rest at 2 L dk = {} T",
        config.threshold, config.schedule.near, config.schedule.far
    ));
    for p in &report.pairs {
        table.push(vec![
            p.target.0 as f64,
            p.target.1 as f64,
            p.target_coefficient,
            p.worst_off_target,
            p.worst_term.0 as f64,
            p.worst_term.1 as f64,
            p.ratio,
            f64::from(u8::from(p.pass)),
        ])?;
    }
    table.summarize("worst_ratio", report.worst_ratio())?;
    table.summarize("all_pass", report.all_pass())?;
    Ok((table, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::michelson_network;

    fn cav() -> CavityTemplate {
        SelectivityConfig::reference().cavity
    }

    #[test]
    fn lossless_sweep_conserves_power() {
        let spec = michelson_network(0.5, CavityTemplate { roundtrip_loss: 0.0, ..cav() });
        let cfg = NetworkSweepConfig {
            parameter: SweepParameter::AtomPhase { mode: 1 },
            values: vec![-1e-3, 0.0, 2e-4, 0.3],
            atom_phases: vec![1e-4],
            fit: None,
        };
        let t = run_network_sweep(&spec, &cfg).unwrap();
        for p in t.column("output_power").unwrap() {
            assert!((p - 1.0).abs() < 1e-10);
        }
        assert_eq!(t.columns().len(), 6);
    }

    #[test]
    fn sweep_with_fit_adds_coefficients() {
        let spec = michelson_network(0.5, cav());
        let cfg = NetworkSweepConfig {
            parameter: SweepParameter::Detuning { mode: 0 },
            values: vec![0.02 * 5e-3 / 0.026],
            atom_phases: vec![],
            fit: Some(SweepFit {
                coupling: SelectivityConfig::reference().coupling,
                half_width: 5.0,
            }),
        };
        let t = run_network_sweep(&spec, &cfg).unwrap();
        assert!(t.column_index("q01").is_some());
        assert!(t.column("q01").unwrap()[0] != 0.0);
    }

    #[test]
    fn unknown_sweep_kind_is_rejected() {
        let text = r#"{"parameter": {"kind": "length"}, "values": [1.0]}"#;
        assert!(serde_json::from_str::<NetworkSweepConfig>(text).is_err());
    }
}
