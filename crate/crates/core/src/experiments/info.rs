use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Either an atom number with a resolution `r`, or a squeezing level. An
/// atom number may accompany the squeezing level to size the total space.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InfoInput {
    pub atoms: Option<f64>,
    pub r: Option<f64>,
    /// dB relative to `N/4`.
    pub squeezing_db: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InfoReport {
    pub atoms: Option<f64>,
    pub r: Option<f64>,
    /// `r^2 N`.
    pub states: Option<f64>,
    /// `log2(r^2 N)`.
    pub qubits: Option<f64>,
    /// `log10(dn_-^2 / (N/4))`, absent when only the squeezing is known.
    pub log_variance_ratio: Option<f64>,
    pub squeezing_db: f64,
    /// `-Sq / (10 log10 2)`.
    pub bits: f64,
    /// `log2(N + 1)`, the qubit content of the whole Dicke space.
    pub total_space_qubits: Option<f64>,
    pub warnings: Vec<String>,
}

fn positive(name: &'static str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: format!("must be positive and finite, got {v}"),
        })
    }
}

/// With `dn_- = 1/(2r)`: states `r^2 N`, squeezing
/// `10 log10(dn_-^2/(N/4))` and `N_bits = -Sq/(10 log10 2)`.
pub fn run_info_content(input: &InfoInput) -> Result<InfoReport> {
    let bits_of = |db: f64| -db / (10.0 * 2f64.log10());
    match (input.atoms, input.r, input.squeezing_db) {
        (Some(n), Some(r), None) => {
            let n = positive("atoms", n)?;
            let r = positive("r", r)?;
            let states = r * r * n;
            let dn = 1.0 / (2.0 * r);
            let log_ratio = (dn * dn / (n / 4.0)).log10();
            let db = 10.0 * log_ratio;
            let mut warnings = Vec::new();
            if states < 1.0 {
                warnings.push(format!("r^2 N = {states} < 1: fewer than one distinguishable state"));
            }
            if r > 1.0 {
                warnings.push(format!("r = {r} exceeds the sphere"));
            }
            Ok(InfoReport {
                atoms: Some(n),
                r: Some(r),
                states: Some(states),
                qubits: Some(states.log2()),
                log_variance_ratio: Some(log_ratio),
                squeezing_db: db,
                bits: bits_of(db),
                total_space_qubits: Some((n + 1.0).log2()),
                warnings,
            })
        }
        (n, None, Some(db)) => {
            if !db.is_finite() {
                return Err(Error::InvalidParameter {
                    name: "squeezing_db",
                    reason: format!("must be finite, got {db}"),
                });
            }
            let mut report = InfoReport {
                atoms: None,
                r: None,
                states: None,
                qubits: None,
                log_variance_ratio: None,
                squeezing_db: db,
                bits: bits_of(db),
                total_space_qubits: None,
                warnings: Vec::new(),
            };
            if let Some(n) = n {
                let n = positive("atoms", n)?;
                let dn2 = 10f64.powf(db / 10.0) * n / 4.0;
                let r = 1.0 / (2.0 * dn2.sqrt());
                report.atoms = Some(n);
                report.r = Some(r);
                report.states = Some(r * r * n);
                report.qubits = Some((r * r * n).log2());
                report.log_variance_ratio = Some(db / 10.0);
                report.total_space_qubits = Some((n + 1.0).log2());
            }
            if db > 0.0 {
                report.warnings.push(format!("{db} dB is anti-squeezed; the bit count is negative"));
            }
            Ok(report)
        }
        _ => Err(Error::Config(
            "give either atoms and r, or squeezing_db (optionally with atoms)".into(),
        )),
    }
}
