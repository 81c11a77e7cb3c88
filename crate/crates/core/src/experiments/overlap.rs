use std::f64::consts::FRAC_PI_2;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::table::{ResultTable, DIMENSIONLESS};
use crate::error::{Error, Result};
use crate::numerics::linspace;
use crate::spin::{build_collective_ops, Propagator, SpinState, SpinSystem, C64};

fn default_xi() -> Vec<f64> {
    vec![2.0, 4.0, 6.0]
}

fn default_time_points() -> usize {
    41
}

fn default_time_scale() -> f64 {
    1.0
}

/// Overlap of a squeezed state with its `Z`-phase-shifted copy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OverlapConfig {
    pub atoms: Vec<u64>,
    #[serde(default = "default_xi")]
    pub xi: Vec<f64>,
    #[serde(default = "default_time_points")]
    pub time_points: usize,
    /// The time grid ends at `time_scale * ln(N) / (2N)`, where the
    /// coherent-state spread has grown to `r = 1`.
    #[serde(default = "default_time_scale")]
    pub time_scale: f64,
    /// Explicit TACT times; replaces the generated grid.
    #[serde(default)]
    pub times: Option<Vec<f64>>,
}

impl Default for OverlapConfig {
    fn default() -> Self {
        Self {
            atoms: vec![100, 200, 500],
            xi: default_xi(),
            time_points: default_time_points(),
            time_scale: default_time_scale(),
            times: None,
        }
    }
}

impl OverlapConfig {
    pub fn validate(&self) -> Result<()> {
        if self.atoms.is_empty() || self.atoms.contains(&0) {
            return Err(Error::InvalidParameter {
                name: "atoms",
                reason: "need at least one positive atom number".into(),
            });
        }
        if self.xi.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "xi",
                reason: "values must be finite".into(),
            });
        }
        let ok_grid = match &self.times {
            Some(t) => t.iter().all(|v| v.is_finite() && *v >= 0.0),
            None => self.time_points >= 1 && self.time_scale.is_finite() && self.time_scale >= 0.0,
        };
        if !ok_grid {
            return Err(Error::InvalidParameter {
                name: "times",
                reason: "times must be finite and non-negative".into(),
            });
        }
        Ok(())
    }

    pub fn times_for(&self, atoms: u64) -> Vec<f64> {
        match &self.times {
            Some(t) => t.clone(),
            None => {
                let n = atoms as f64;
                let end = if atoms > 1 { self.time_scale * n.ln() / (2.0 * n) } else { 0.0 };
                linspace(0.0, end, self.time_points)
            }
        }
    }
}

/// One TACT time for one ensemble.
#[derive(Clone, Debug, PartialEq)]
pub struct SqueezedPoint {
    pub time: f64,
    /// `sqrt <Z^2>`.
    pub dn_plus: f64,
    /// `sqrt <Y^2>`.
    pub dn_minus: f64,
    /// `2 dn_plus / N`.
    pub r: f64,
    /// Occupation of each Dicke level.
    weights: Vec<f64>,
    m: Vec<f64>,
}

impl SqueezedPoint {
    /// `|<psi|exp(i Z phi)|psi>|^2`; `Z` is diagonal, so this is a
    /// weighted sum of phases.
    pub fn overlap(&self, phi: f64) -> f64 {
        let s: C64 = self
            .weights
            .iter()
            .zip(&self.m)
            .map(|(w, m)| C64::from_polar(*w, m * phi))
            .sum();
        s.norm_sqr().min(1.0)
    }

    /// `phi = 2 xi dn_minus / N`.
    pub fn phase(&self, xi: f64, atoms: u64) -> f64 {
        2.0 * xi * self.dn_minus / atoms as f64
    }
}

/// `psi_1 = exp(-i (YZ+ZY) t) psi_0` with `psi_0` polarized along `-x`.
pub fn tact_squeezed_states(atoms: u64, times: &[f64]) -> Result<Vec<SqueezedPoint>> {
    let sys = SpinSystem::new(atoms)?;
    let ops = build_collective_ops(sys);
    let h = (&(&ops.y * &ops.z) + &(&ops.z * &ops.y)).into_hermitian()?;
    let prop = Propagator::new(&h)?;
    let psi0 = SpinState::coherent(sys, FRAC_PI_2, 0.0);
    let m: Vec<f64> = (0..sys.dim()).map(|k| sys.m(k)).collect();
    times
        .par_iter()
        .map(|&t| {
            let psi = prop.apply(&psi0, t)?;
            let (mz, vz) = psi.moments(&ops.z)?;
            let (my, vy) = psi.moments(&ops.y)?;
            let dn_plus = (vz + mz * mz).sqrt();
            Ok(SqueezedPoint {
                time: t,
                dn_plus,
                dn_minus: (vy + my * my).sqrt(),
                r: 2.0 * dn_plus / atoms as f64,
                weights: psi.vector().iter().map(|c| c.norm_sqr()).collect(),
                m: m.clone(),
            })
        })
        .collect()
}

/// Rows `(N, xi, t, r, dn+, dn-, phi, overlap, exp(-xi^2/4))`. Since
/// `<Z^2> <= j^2`, `r <= 1` up to rounding; points beyond it are dropped
/// with a warning.
pub fn run_overlap_study(config: &OverlapConfig) -> Result<ResultTable> {
    config.validate()?;
    let mut table = ResultTable::new(
        "overlap",
        &[
            ("N", DIMENSIONLESS),
            ("xi", DIMENSIONLESS),
            ("t", "1/chi"),
            ("r", DIMENSIONLESS),
            ("dn_plus", DIMENSIONLESS),
            ("dn_minus", DIMENSIONLESS),
            ("phi", "rad"),
            ("overlap", DIMENSIONLESS),
            ("flat_reference", DIMENSIONLESS),
        ],
    )
    .with_config(config)?;
    table.assume("initial state: coherent state along -x, TACT generator YZ+ZY with unit strength");
    let mut dropped = 0usize;
    for &n in &config.atoms {
        let points = tact_squeezed_states(n, &config.times_for(n))?;
        let over = points.iter().filter(|p| p.r > 1.0 + 1e-12).count();
        if over > 0 {
            log::warn!("N = {n}: {over} time point(s) with r > 1 truncated");
            dropped += over;
        }
        for p in points.iter().filter(|p| p.r <= 1.0 + 1e-12) {
            for &xi in &config.xi {
                let phi = p.phase(xi, n);
                table.push(vec![
                    n as f64,
                    xi,
                    p.time,
                    p.r,
                    p.dn_plus,
                    p.dn_minus,
                    phi,
                    p.overlap(phi),
                    (-xi * xi / 4.0).exp(),
                ])?;
            }
        }
    }
    table.summarize("truncated_points", dropped)?;
    Ok(table)
}
