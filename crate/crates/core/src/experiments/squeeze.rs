use std::f64::consts::FRAC_PI_2;

use nalgebra::{Matrix2, Matrix3, Vector3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::table::{ResultTable, DIMENSIONLESS};
use crate::error::{Error, Result};
use crate::numerics::linspace;
use crate::spin::{build_collective_ops, CollectiveOps, Propagator, SpinOperator, SpinState, SpinSystem};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SqueezeProtocol {
    /// One-axis twisting, `Z^2`.
    Oat,
    /// Two-axis countertwisting, `YZ + ZY` about the `x`-polarized state.
    Tact,
}

impl SqueezeProtocol {
    pub fn generator(self, ops: &CollectiveOps) -> Result<SpinOperator> {
        match self {
            SqueezeProtocol::Oat => (&ops.z * &ops.z).into_hermitian(),
            SqueezeProtocol::Tact => (&(&ops.y * &ops.z) + &(&ops.z * &ops.y)).into_hermitian(),
        }
    }

    /// End of the default time grid: past the optimum for both protocols.
    pub fn default_end(self, atoms: u64) -> f64 {
        let n = atoms.max(2) as f64;
        match self {
            SqueezeProtocol::Oat => 3.0 * n.powf(-2.0 / 3.0),
            SqueezeProtocol::Tact => n.ln() / n,
        }
    }
}

impl std::str::FromStr for SqueezeProtocol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "oat" => Ok(SqueezeProtocol::Oat),
            "tact" => Ok(SqueezeProtocol::Tact),
            other => Err(Error::Config(format!("unknown protocol `{other}` (expected oat or tact)"))),
        }
    }
}

fn default_points() -> usize {
    101
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SqueezeConfig {
    pub protocol: SqueezeProtocol,
    pub atoms: u64,
    #[serde(default = "default_points")]
    pub time_points: usize,
    /// Defaults to `SqueezeProtocol::default_end`.
    #[serde(default)]
    pub t_max: Option<f64>,
}

impl SqueezeConfig {
    pub fn new(protocol: SqueezeProtocol, atoms: u64) -> Self {
        Self {
            protocol,
            atoms,
            time_points: default_points(),
            t_max: None,
        }
    }
}

/// Spin length and the smallest variance perpendicular to the mean spin.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransverseVariance {
    pub mean_length: f64,
    pub min_variance: f64,
    pub max_variance: f64,
}

/// Symmetrized covariance of `(X, Y, Z)` restricted to the plane normal to
/// `<S>`, diagonalized.
pub fn transverse_variance(state: &SpinState, ops: &CollectiveOps) -> Result<TransverseVariance> {
    let v = state.vector();
    let applied: Vec<_> = [&ops.x, &ops.y, &ops.z].iter().map(|o| o.apply(v)).collect();
    let mean = Vector3::from_fn(|a, _| v.dotc(&applied[a]).re);
    // <S_a S_b + S_b S_a>/2 = Re <S_a psi | S_b psi>
    let second = Matrix3::from_fn(|a, b| applied[a].dotc(&applied[b]).re);
    let cov = second - mean * mean.transpose();
    let len = mean.norm();
    let n = if len > 1e-12 { mean / len } else { Vector3::z() };
    let seed = if n.x.abs() < 0.9 { Vector3::x() } else { Vector3::y() };
    let e1 = (seed - n * n.dot(&seed)).normalize();
    let e2 = n.cross(&e1);
    let c = Matrix2::new(
        e1.dot(&(cov * e1)),
        e1.dot(&(cov * e2)),
        e2.dot(&(cov * e1)),
        e2.dot(&(cov * e2)),
    );
    let eig = c.symmetric_eigen().eigenvalues;
    Ok(TransverseVariance {
        mean_length: len,
        min_variance: eig.min().max(0.0),
        max_variance: eig.max(),
    })
}

/// Rows `(t, |<S>|, V_min, V_max, dB)` with `dB = 10 log10(V_min / (N/4))`.
pub fn run_squeeze_protocols(config: &SqueezeConfig) -> Result<ResultTable> {
    let end = config.t_max.unwrap_or_else(|| config.protocol.default_end(config.atoms));
    if !(end >= 0.0) || !end.is_finite() || config.time_points == 0 {
        return Err(Error::InvalidParameter {
            name: "t_max",
            reason: format!("need a finite t_max >= 0 and time_points >= 1, got {end}"),
        });
    }
    let sys = SpinSystem::new(config.atoms)?;
    let ops = build_collective_ops(sys);
    let prop = Propagator::new(&config.protocol.generator(&ops)?)?;
    let psi0 = SpinState::coherent(sys, FRAC_PI_2, 0.0);
    let sql = config.atoms as f64 / 4.0;
    let times = linspace(0.0, end, config.time_points);
    let rows = times
        .par_iter()
        .map(|&t| {
            let tv = transverse_variance(&prop.apply(&psi0, t)?, &ops)?;
            Ok(vec![
                t,
                tv.mean_length,
                tv.min_variance,
                tv.max_variance,
                10.0 * (tv.min_variance / sql).log10(),
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    let mut table = ResultTable::new(
        "squeeze",
        &[
            ("t", "1/chi"),
            ("mean_spin", DIMENSIONLESS),
            ("min_variance", DIMENSIONLESS),
            ("max_variance", DIMENSIONLESS),
            ("squeezing", "dB"),
        ],
    )
    .with_config(config)?;
    table.assume("unit interaction strength; initial coherent state along -x");
    let mut best = (0.0, f64::INFINITY);
    for r in rows {
        if r[4] < best.1 {
            best = (r[0], r[4]);
        }
        table.push(r)?;
    }
    table.summarize("best_time", best.0)?;
    table.summarize("best_squeezing_db", best.1)?;
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coherent_state_is_at_the_limit() {
        let t = run_squeeze_protocols(&SqueezeConfig {
            time_points: 1,
            ..SqueezeConfig::new(SqueezeProtocol::Oat, 30)
        })
        .unwrap();
        assert!(t.rows()[0][4].abs() < 1e-10);
        assert!((t.rows()[0][1] - 15.0).abs() < 1e-10);
    }

    #[test]
    fn tact_beats_oat() {
        let best = |p| {
            let t = run_squeeze_protocols(&SqueezeConfig::new(p, 100)).unwrap();
            t.metadata.summary["best_squeezing_db"].as_f64().unwrap()
        };
        let (oat, tact) = (best(SqueezeProtocol::Oat), best(SqueezeProtocol::Tact));
        assert!(oat < -3.0, "{oat}");
        assert!(tact < oat, "{tact} {oat}");
    }

    #[test]
    fn protocol_names() {
        assert_eq!("TACT".parse::<SqueezeProtocol>().unwrap(), SqueezeProtocol::Tact);
        assert!("xyz".parse::<SqueezeProtocol>().is_err());
    }
}
