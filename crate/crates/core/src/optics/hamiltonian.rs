use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::cavity::{ac_stark_shift_rate, cavity_buildup_exact, phase_per_atom};
use super::michelson::{cavity_phases, michelson_amplitudes};
use super::params::{PhysicalParams, MUCH_LESS};
use crate::error::Result;

/// Coefficients of `H/hbar = omega Z + chi Z^2` (single cavity) or
/// `omega (Z1 + T_B Z2) + chi (Z1 - Z2)^2` (cavity pair), rad/s.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianCoeffs {
    pub omega: f64,
    pub chi: f64,
    /// Detuning condition of the linearisation holds with a factor `MUCH_LESS` margin.
    pub linearization_valid: bool,
}

fn lw2_gd(params: &PhysicalParams) -> f64 {
    params.wavelength_ratio.powi(2) * params.linewidth_ratio
}

/// Single-cavity coefficients for `atoms` atoms (`|Z| <= N/2`).
pub fn single_cavity_coeffs(params: &PhysicalParams, atoms: u64) -> Result<HamiltonianCoeffs> {
    let rate = params.photon_rate()?;
    let t = params.mirror_transmissivity;
    let u = 4.0 * params.length_detuning() / t;
    let g = lw2_gd(params);
    let omega = 24.0 / (PI * PI * t) / (1.0 + u * u) * g * rate;
    let chi = -1152.0 / PI.powi(4) / (t * t) * u / (1.0 + u * u).powi(2) * g * g * rate;
    let zmax = atoms as f64 / 2.0;
    let valid = params.detuning.abs() * params.cavity_length >= MUCH_LESS * phase_per_atom(params).abs() * zmax;
    Ok(HamiltonianCoeffs {
        omega,
        chi,
        linearization_valid: valid,
    })
}

/// Buildup model of the single-cavity energy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SingleCavityForm {
    /// Lossless Lorentzian `(4/T)[1 + (2 alpha/T)^2]^-1`.
    Lorentzian,
    /// Exact geometric-sum buildup including the round-trip loss.
    Exact,
}

/// `H(Z)/hbar`, rad/s, with `alpha = 2(L Delta k + delta_phi Z)`.
pub fn single_cavity_energy(params: &PhysicalParams, z: f64, form: SingleCavityForm) -> Result<f64> {
    let rate = params.photon_rate()?;
    let t = params.mirror_transmissivity;
    let alpha = 2.0 * (params.length_detuning() + phase_per_atom(params) * z);
    let buildup = match form {
        SingleCavityForm::Lorentzian => 4.0 / t / (1.0 + (2.0 * alpha / t).powi(2)),
        SingleCavityForm::Exact => cavity_buildup_exact(alpha, t, params.roundtrip_loss),
    };
    Ok(6.0 / (PI * PI) * buildup * lw2_gd(params) * z * rate)
}

/// Two-cavity coefficients.
pub fn pair_coeffs(params: &PhysicalParams) -> Result<HamiltonianCoeffs> {
    let rate = params.photon_rate()?;
    let t = params.mirror_transmissivity;
    let tb = params.beam_splitter_transmissivity;
    let rb = 1.0 - tb;
    let g = lw2_gd(params);
    let omega = 192.0 / (PI * PI) * rb / (1.0 + tb).powi(2) / t * g * rate;
    let chi = -2304.0 / PI.powi(4) * rb * tb / (1.0 + tb).powi(3) / (t * params.length_detuning()) * g * g * rate;
    let valid = 2.0 * params.cavity_length * params.detuning.abs() >= MUCH_LESS * params.roundtrip_loss;
    Ok(HamiltonianCoeffs {
        omega,
        chi,
        linearization_valid: valid,
    })
}

/// Fidelity tier of the intracavity power model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PowerTier {
    /// Exact interferometer amplitudes times the exact cavity buildup.
    Exact,
    /// Lorentzian resonance form including the loss `eps`.
    Lorentzian,
    /// Lorentzian form with `eps` dropped.
    LargeDetuning,
    /// First order in `phi / (L Delta k)`.
    Linearized,
}

impl PowerTier {
    pub const ALL: [PowerTier; 4] = [
        PowerTier::Exact,
        PowerTier::Lorentzian,
        PowerTier::LargeDetuning,
        PowerTier::Linearized,
    ];
}

/// Intracavity powers relative to the input, `P_j / P_0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntracavityPowers {
    pub gain1: f64,
    pub gain2: f64,
    /// `|phi_j| << L |Delta k|` with a factor `MUCH_LESS` margin.
    pub linear_valid: bool,
}

impl IntracavityPowers {
    /// Powers in watts (needs the wavelength when the flux is a photon rate).
    pub fn watts(&self, params: &PhysicalParams) -> Result<(f64, f64)> {
        let p0 = params.photon_rate()? * params.photon_energy()?;
        Ok((self.gain1 * p0, self.gain2 * p0))
    }

    /// Circulating photon rates.
    pub fn photon_rates(&self, params: &PhysicalParams) -> Result<(f64, f64)> {
        let r = params.photon_rate()?;
        Ok((self.gain1 * r, self.gain2 * r))
    }
}

/// Intracavity powers with `phi_j = 2 delta_phi Z_j`.
pub fn intracavity_powers(params: &PhysicalParams, z1: f64, z2: f64, tier: PowerTier) -> IntracavityPowers {
    let dphi = phase_per_atom(params);
    intracavity_powers_at_phase(params, 2.0 * dphi * z1, 2.0 * dphi * z2, tier)
}

/// Intracavity powers at given atom-induced phases.
pub fn intracavity_powers_at_phase(params: &PhysicalParams, phi1: f64, phi2: f64, tier: PowerTier) -> IntracavityPowers {
    let t = params.mirror_transmissivity;
    let eps = params.roundtrip_loss;
    let tb = params.beam_splitter_transmissivity;
    let rb = 1.0 - tb;
    let ld = params.length_detuning();
    let d = 2.0 * ld;
    let common = phi2 + tb * phi1 + (1.0 + tb) * d;
    let (gain1, gain2) = match tier {
        PowerTier::Exact => {
            let amp = michelson_amplitudes(params, phi1, phi2);
            let (a1, a2) = cavity_phases(params, phi1, phi2);
            (
                amp.a.norm_sqr() * cavity_buildup_exact(a1, t, eps),
                amp.c.norm_sqr() * cavity_buildup_exact(a2, t, eps),
            )
        }
        PowerTier::Lorentzian => {
            let den = eps * eps + 4.0 / (1.0 + tb).powi(2) * common * common;
            let pre = 4.0 / t * rb / (1.0 + tb).powi(2);
            (
                pre * (eps * eps + 4.0 * (phi2 + d).powi(2)) / den,
                pre * tb * (eps * eps + 4.0 * (phi1 + d).powi(2)) / den,
            )
        }
        PowerTier::LargeDetuning => {
            let den = common * common;
            (
                4.0 * rb / t * (phi2 + d).powi(2) / den,
                4.0 * rb * tb / t * (phi1 + d).powi(2) / den,
            )
        }
        PowerTier::Linearized => {
            let pre = 4.0 / t * rb / (1.0 + tb).powi(2);
            (
                pre * (1.0 + tb * (phi2 - phi1) / ((1.0 + tb) * ld)),
                pre * tb * (1.0 + (phi1 - phi2) / ((1.0 + tb) * ld)),
            )
        }
    };
    let linear_valid = MUCH_LESS * phi1.abs().max(phi2.abs()) <= ld.abs();
    IntracavityPowers {
        gain1,
        gain2,
        linear_valid,
    }
}

/// Classical pair energy `H/hbar = 2(omega_ac,1 Z1 + omega_ac,2 Z2)`, rad/s.
pub fn pair_energy(params: &PhysicalParams, z1: f64, z2: f64, tier: PowerTier) -> Result<f64> {
    let p = intracavity_powers(params, z1, z2, tier);
    let (r1, r2) = p.photon_rates(params)?;
    Ok(2.0 * (ac_stark_shift_rate(params, r1) * z1 + ac_stark_shift_rate(params, r2) * z2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optics::params::{rb85_linewidth_ratio, LightFlux};

    fn fig2(ldk_over_t: f64) -> PhysicalParams {
        let t = 5e-3;
        let l = 0.026;
        PhysicalParams {
            wavelength_ratio: 1e-2,
            linewidth_ratio: rb85_linewidth_ratio(),
            mirror_transmissivity: t,
            roundtrip_loss: 1.2e-6,
            cavity_length: l,
            detuning: ldk_over_t * t / l,
            beam_splitter_transmissivity: 0.5,
            flux: LightFlux::Watts(12e-9),
            wavelength: Some(780e-9),
        }
    }

    #[test]
    fn chi_sign_opposes_detuning() {
        for s in [-1.0, 1.0] {
            let p = fig2(0.3 * s);
            let single = single_cavity_coeffs(&p, 100).unwrap();
            let pair = pair_coeffs(&p).unwrap();
            assert_eq!(single.chi.signum(), -s);
            assert_eq!(pair.chi.signum(), -s);
        }
        let a = single_cavity_coeffs(&fig2(0.3), 100).unwrap();
        let b = single_cavity_coeffs(&fig2(-0.3), 100).unwrap();
        assert_eq!(a.omega, b.omega);
        assert!((a.chi + b.chi).abs() < 1e-15 * a.chi.abs());
    }

    #[test]
    fn zero_flux_gives_zero() {
        let p = PhysicalParams {
            flux: LightFlux::PhotonRate(0.0),
            ..fig2(0.2)
        };
        let c = single_cavity_coeffs(&p, 10).unwrap();
        assert_eq!((c.omega, c.chi), (0.0, 0.0));
    }

    #[test]
    fn pair_chi_inverse_in_detuning() {
        let a = pair_coeffs(&fig2(0.2)).unwrap();
        let b = pair_coeffs(&fig2(0.4)).unwrap();
        assert!((a.chi / b.chi - 2.0).abs() < 1e-12);
    }

    #[test]
    fn linearized_baseline_and_antisymmetry() {
        let p = fig2(0.5);
        let base = intracavity_powers(&p, 0.0, 0.0, PowerTier::Linearized);
        let want = 4.0 / 5e-3 * 0.5 / 2.25;
        assert!((base.gain1 - want).abs() < 1e-12 * want);
        let x = intracavity_powers(&p, 300.0, -100.0, PowerTier::Linearized);
        let y = intracavity_powers(&p, -100.0, 300.0, PowerTier::Linearized);
        let c2 = x.gain2 / (want * 0.5) - 1.0;
        let c2s = y.gain2 / (want * 0.5) - 1.0;
        assert!((c2 + c2s).abs() < 1e-12);
    }

    #[test]
    fn large_detuning_parity() {
        let p = fig2(0.5);
        let q = p.with_detuning(-p.detuning);
        let a = intracavity_powers_at_phase(&p, 1e-4, -3e-5, PowerTier::LargeDetuning);
        let b = intracavity_powers_at_phase(&q, -1e-4, 3e-5, PowerTier::LargeDetuning);
        assert!((a.gain1 - b.gain1).abs() < 1e-9 * a.gain1);
        assert!((a.gain2 - b.gain2).abs() < 1e-9 * a.gain2);
    }
}
