use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Planck constant, J s.
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Speed of light, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Regime factor used to read "much less than" as a hard threshold.
pub const MUCH_LESS: f64 = 10.0;

/// Rb-85 D2 line wavelength, m.
pub const RB85_WAVELENGTH: f64 = 780e-9;
/// Rb-85 natural linewidth `Gamma / 2 pi`, Hz.
pub const RB85_LINEWIDTH_HZ: f64 = 6.06e6;
/// Half the Rb-85 hyperfine splitting, `Delta / 2 pi`, Hz.
pub const RB85_HALF_HYPERFINE_HZ: f64 = 3.4e9;

/// `Gamma / Delta` for the Rb-85 working point.
pub fn rb85_linewidth_ratio() -> f64 {
    RB85_LINEWIDTH_HZ / RB85_HALF_HYPERFINE_HZ
}

/// Incoming light, either as a photon rate or as a power.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LightFlux {
    /// Photons per second.
    PhotonRate(f64),
    /// Watts; converting to a photon rate requires the wavelength.
    Watts(f64),
}

/// Optical and atomic constants of one cavity (or a two-cavity
/// interferometer with identical cavities).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalParams {
    /// `lambda / w`.
    pub wavelength_ratio: f64,
    /// `Gamma / Delta`, signed by the detuning side.
    pub linewidth_ratio: f64,
    /// Input mirror transmissivity `T`.
    pub mirror_transmissivity: f64,
    /// Round-trip loss `epsilon`.
    pub roundtrip_loss: f64,
    /// Cavity length `L`, m.
    pub cavity_length: f64,
    /// Wave-number detuning `Delta k`, 1/m.
    pub detuning: f64,
    /// Interferometer beam-splitter transmissivity `T_B`.
    #[serde(default = "half")]
    pub beam_splitter_transmissivity: f64,
    pub flux: LightFlux,
    /// Optical wavelength, m; needed only when the flux is given in watts.
    #[serde(default)]
    pub wavelength: Option<f64>,
}

fn half() -> f64 {
    0.5
}

impl PhysicalParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |name: &'static str, reason: &str| {
            Err(Error::InvalidParameter {
                name,
                reason: reason.to_string(),
            })
        };
        if !(self.wavelength_ratio.is_finite() && self.wavelength_ratio > 0.0) {
            return bad("wavelength_ratio", "must be positive");
        }
        if !self.linewidth_ratio.is_finite() {
            return bad("linewidth_ratio", "must be finite");
        }
        if !(self.mirror_transmissivity > 0.0 && self.mirror_transmissivity < 1.0) {
            return bad("mirror_transmissivity", "must lie in (0, 1)");
        }
        if !(self.roundtrip_loss >= 0.0 && self.roundtrip_loss < 1.0) {
            return bad("roundtrip_loss", "must lie in [0, 1)");
        }
        if !(self.cavity_length.is_finite() && self.cavity_length > 0.0) {
            return bad("cavity_length", "must be positive");
        }
        if !self.detuning.is_finite() {
            return bad("detuning", "must be finite");
        }
        let tb = self.beam_splitter_transmissivity;
        if !(tb > 0.0 && tb < 1.0) {
            return bad("beam_splitter_transmissivity", "must lie in (0, 1)");
        }
        match self.flux {
            LightFlux::PhotonRate(r) | LightFlux::Watts(r) if !(r.is_finite() && r >= 0.0) => {
                return bad("flux", "must be finite and non-negative");
            }
            LightFlux::Watts(_) if self.wavelength.is_none() => return Err(Error::MissingWavelength),
            _ => {}
        }
        if let Some(l) = self.wavelength {
            if !(l.is_finite() && l > 0.0) {
                return bad("wavelength", "must be positive");
            }
        }
        Ok(())
    }

    /// Human-readable notes for parameters outside the intended regime.
    pub fn regime_warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.roundtrip_loss * MUCH_LESS >= self.mirror_transmissivity {
            out.push(format!(
                "roundtrip_loss {} is not much smaller than mirror_transmissivity {}",
                self.roundtrip_loss, self.mirror_transmissivity
            ));
        }
        out
    }

    /// Logs every regime warning and returns how many were emitted.
    pub fn warn_regime(&self) -> usize {
        let w = self.regime_warnings();
        for msg in &w {
            log::warn!("{msg}");
        }
        w.len()
    }

    pub fn beam_splitter_reflectivity(&self) -> f64 {
        1.0 - self.beam_splitter_transmissivity
    }

    /// Incoming photons per second.
    pub fn photon_rate(&self) -> Result<f64> {
        match self.flux {
            LightFlux::PhotonRate(r) => Ok(r),
            LightFlux::Watts(p) => Ok(p / self.photon_energy()?),
        }
    }

    /// `hbar omega_0 = h c / lambda`, J.
    pub fn photon_energy(&self) -> Result<f64> {
        let l = self.wavelength.ok_or(Error::MissingWavelength)?;
        Ok(PLANCK * SPEED_OF_LIGHT / l)
    }

    /// Copy with a different detuning.
    pub fn with_detuning(&self, detuning: f64) -> Self {
        Self {
            detuning,
            ..self.clone()
        }
    }

    /// `L Delta k`.
    pub fn length_detuning(&self) -> f64 {
        self.cavity_length * self.detuning
    }
}
