use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::table::{ResultTable, DIMENSIONLESS};
use crate::error::Result;
use crate::numerics::{linear_residual, linspace};
use crate::optics::params::{rb85_linewidth_ratio, RB85_WAVELENGTH};
use crate::optics::{intracavity_powers, pair_energy, LightFlux, PhysicalParams, PowerTier};

fn default_detunings() -> Vec<f64> {
    vec![0.08, 0.5]
}

fn default_z_max() -> f64 {
    3000.0
}

fn default_points() -> usize {
    61
}

fn default_lines() -> usize {
    9
}

fn default_tier() -> PowerTier {
    PowerTier::Lorentzian
}

/// Two-cavity power map and four-step Hamiltonian inset. The optical
/// constants are required; the beam splitter, linewidth ratio and
/// wavelength fall back to documented assumptions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fig2Config {
    /// `lambda / w`.
    pub wavelength_ratio: f64,
    pub mirror_transmissivity: f64,
    pub roundtrip_loss: f64,
    /// m.
    pub cavity_length: f64,
    /// W.
    pub input_power: f64,
    #[serde(default)]
    pub linewidth_ratio: Option<f64>,
    #[serde(default)]
    pub beam_splitter_transmissivity: Option<f64>,
    /// m.
    #[serde(default)]
    pub wavelength: Option<f64>,
    /// Values of `L Delta k / T`.
    #[serde(default = "default_detunings")]
    pub detunings: Vec<f64>,
    #[serde(default = "default_z_max")]
    pub z_max: f64,
    /// Grid points per axis of the power map.
    #[serde(default = "default_points")]
    pub map_points: usize,
    /// `Z_1` points per inset line.
    #[serde(default = "default_points")]
    pub inset_points: usize,
    /// Equidistant `Z_2` values in the inset.
    #[serde(default = "default_lines")]
    pub inset_lines: usize,
    #[serde(default = "default_tier")]
    pub tier: PowerTier,
}

impl Fig2Config {
    /// `w/lambda = 100`, `T = 5e-3`, `eps = 1.2e-6`, `L = 26 mm`, `P_0 = 12 nW`.
    pub fn reference() -> Self {
        Self {
            wavelength_ratio: 1e-2,
            mirror_transmissivity: 5e-3,
            roundtrip_loss: 1.2e-6,
            cavity_length: 0.026,
            input_power: 12e-9,
            linewidth_ratio: None,
            beam_splitter_transmissivity: None,
            wavelength: None,
            detunings: default_detunings(),
            z_max: default_z_max(),
            map_points: default_points(),
            inset_points: default_points(),
            inset_lines: default_lines(),
            tier: default_tier(),
        }
    }

    /// Physical parameters at `L Delta k = f T`, plus the assumption notes.
    pub fn params(&self, f: f64) -> (PhysicalParams, Vec<String>) {
        let mut notes = Vec::new();
        let lw = self.linewidth_ratio.unwrap_or_else(|| {
            notes.push(format!(
                "linewidth_ratio = {} (Rb-85 D2 linewidth over half the ground hyperfine splitting)",
                rb85_linewidth_ratio()
            ));
            rb85_linewidth_ratio()
        });
        let tb = self.beam_splitter_transmissivity.unwrap_or_else(|| {
            notes.push("beam_splitter_transmissivity = 0.5 (R_B = 0.5)".into());
            0.5
        });
        let wl = self.wavelength.unwrap_or_else(|| {
            notes.push(format!("wavelength = {RB85_WAVELENGTH:e} m"));
            RB85_WAVELENGTH
        });
        let p = PhysicalParams {
            wavelength_ratio: self.wavelength_ratio,
            linewidth_ratio: lw,
            mirror_transmissivity: self.mirror_transmissivity,
            roundtrip_loss: self.roundtrip_loss,
            cavity_length: self.cavity_length,
            detuning: f * self.mirror_transmissivity / self.cavity_length,
            beam_splitter_transmissivity: tb,
            flux: LightFlux::Watts(self.input_power),
            wavelength: Some(wl),
        };
        (p, notes)
    }

    pub fn validate(&self) -> Result<()> {
        let (p, _) = self.params(self.detunings.first().copied().unwrap_or(1.0));
        p.validate()?;
        let bad = |name: &'static str, reason: &str| crate::error::Error::InvalidParameter {
            name,
            reason: reason.into(),
        };
        if self.detunings.is_empty() || self.detunings.iter().any(|f| !f.is_finite() || *f == 0.0) {
            return Err(bad("detunings", "need at least one finite, non-zero L dk / T"));
        }
        if !(self.z_max > 0.0) || !self.z_max.is_finite() {
            return Err(bad("z_max", "must be positive and finite"));
        }
        if self.map_points < 2 || self.inset_points < 3 || self.inset_lines < 1 {
            return Err(bad("points", "need map_points >= 2, inset_points >= 3, inset_lines >= 1"));
        }
        Ok(())
    }
}

/// Linearity of one inset.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InsetLinearity {
    /// `L Delta k / T`.
    pub detuning: f64,
    /// Largest deviation of any line from its straight fit, rad/s.
    pub max_residual: f64,
    /// Spread of `H` over all lines, rad/s.
    pub range: f64,
}

impl InsetLinearity {
    pub fn fraction(&self) -> f64 {
        self.max_residual / self.range
    }
}

pub struct Fig2Output {
    /// `P_1`, `P_2` over the `(Z_1, Z_2)` grid for each detuning.
    pub map: ResultTable,
    /// Four-step averaged `H` along the inset lines.
    pub inset: ResultTable,
    pub linearity: Vec<InsetLinearity>,
}

/// Average of `H` over the four sign configurations of the QND sequence,
/// each for a quarter of the time: `(+,+,+dk)`, `(-,+,-dk)`, `(-,-,+dk)`,
/// `(+,-,-dk)`.
pub fn four_step_energy(params: &PhysicalParams, z1: f64, z2: f64, tier: PowerTier) -> Result<f64> {
    let flipped = params.with_detuning(-params.detuning);
    let h = pair_energy(params, z1, z2, tier)?
        + pair_energy(&flipped, -z1, z2, tier)?
        + pair_energy(params, -z1, -z2, tier)?
        + pair_energy(&flipped, z1, -z2, tier)?;
    Ok(h / 4.0)
}

pub fn run_fig2(config: &Fig2Config) -> Result<Fig2Output> {
    config.validate()?;
    let mut map = ResultTable::new(
        "fig2-power-map",
        &[
            ("L dk / T", DIMENSIONLESS),
            ("Z1", DIMENSIONLESS),
            ("Z2", DIMENSIONLESS),
            ("P1", "W"),
            ("P2", "W"),
        ],
    )
    .with_config(config)?;
    let mut inset = ResultTable::new(
        "fig2-inset",
        &[
            ("L dk / T", DIMENSIONLESS),
            ("Z2", DIMENSIONLESS),
            ("Z1", DIMENSIONLESS),
            ("H", "rad/s"),
        ],
    )
    .with_config(config)?;
    let (_, notes) = config.params(config.detunings[0]);
    for t in [&mut map, &mut inset] {
        for n in &notes {
            t.assume(n.clone());
        }
        t.assume(format!("power tier {:?}", config.tier));
    }
    inset.assume("inset is the classical energy averaged over the four sign configurations");

    let zs = linspace(-config.z_max, config.z_max, config.map_points);
    let z1s = linspace(-config.z_max, config.z_max, config.inset_points);
    let lines = linspace(-config.z_max, config.z_max, config.inset_lines);
    let mut linearity = Vec::new();
    for &f in &config.detunings {
        let (p, _) = config.params(f);
        let grid: Vec<(f64, f64)> = zs.iter().flat_map(|&a| zs.iter().map(move |&b| (a, b))).collect();
        let rows = grid
            .par_iter()
            .map(|&(z1, z2)| {
                let (w1, w2) = intracavity_powers(&p, z1, z2, config.tier).watts(&p)?;
                Ok(vec![f, z1, z2, w1, w2])
            })
            .collect::<Result<Vec<_>>>()?;
        for r in rows {
            map.push(r)?;
        }

        let values = lines
            .par_iter()
            .map(|&z2| {
                z1s.iter()
                    .map(|&z1| four_step_energy(&p, z1, z2, config.tier))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let (mut lo, mut hi, mut worst) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64);
        for (&z2, hs) in lines.iter().zip(&values) {
            worst = worst.max(linear_residual(&z1s, hs));
            for (&z1, &h) in z1s.iter().zip(hs) {
                lo = lo.min(h);
                hi = hi.max(h);
                inset.push(vec![f, z2, z1, h])?;
            }
        }
        let lin = InsetLinearity {
            detuning: f,
            max_residual: worst,
            range: hi - lo,
        };
        inset.summarize(&format!("linearity_residual_fraction@{f}"), lin.fraction())?;
        map.summarize(
            &format!("baseline_p1@{f}"),
            intracavity_powers(&p, 0.0, 0.0, config.tier).watts(&p)?.0,
        )?;
        linearity.push(lin);
    }
    Ok(Fig2Output { map, inset, linearity })
}
