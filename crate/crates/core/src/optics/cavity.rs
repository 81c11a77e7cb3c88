use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::params::PhysicalParams;
use crate::error::Result;
use crate::spin::C64;

/// Optical phase shift per unit `Z` and round trip: `(6/pi^2)(lambda/w)^2 (Gamma/Delta)`.
pub fn phase_per_atom(params: &PhysicalParams) -> f64 {
    6.0 / (PI * PI) * params.wavelength_ratio.powi(2) * params.linewidth_ratio
}

/// Reflection amplitude of a one-sided cavity,
/// `(sqrt(eta) e^{i alpha} - r) / (1 - sqrt(eta) r e^{i alpha})`,
/// with `r = sqrt(1 - T)` and `eta = 1 - eps`.
pub fn cavity_reflection(alpha: f64, t: f64, eps: f64) -> C64 {
    let r = (1.0 - t).sqrt();
    let s = (1.0 - eps).sqrt();
    let e = C64::from_polar(1.0, alpha);
    (e * s - r) / (C64::new(1.0, 0.0) - e * (s * r))
}

/// Small-phase Lorentzian buildup
/// `(4/T)(1 + eps/T)^-2 [1 + (2 alpha/(eps + T))^2]^-1`.
pub fn cavity_buildup(alpha: f64, t: f64, eps: f64) -> f64 {
    let w = 2.0 * alpha / (eps + t);
    4.0 / (t * (1.0 + eps / t).powi(2)) / (1.0 + w * w)
}

/// Exact buildup `|c / a_in|^2 = T / |1 - sqrt(eta) r e^{i alpha}|^2`.
pub fn cavity_buildup_exact(alpha: f64, t: f64, eps: f64) -> f64 {
    let r = (1.0 - t).sqrt();
    let s = (1.0 - eps).sqrt();
    t / (C64::new(1.0, 0.0) - C64::from_polar(s * r, alpha)).norm_sqr()
}

/// Reflection amplitude together with the intracavity intensity ratio.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CavityResponse {
    pub reflection: C64,
    pub buildup: f64,
}

impl CavityResponse {
    /// Exact response at round-trip phase deviation `alpha`.
    pub fn exact(alpha: f64, t: f64, eps: f64) -> Self {
        Self {
            reflection: cavity_reflection(alpha, t, eps),
            buildup: cavity_buildup_exact(alpha, t, eps),
        }
    }
}

/// Differential light shift per circulating photon rate:
/// `omega_ac = (24/pi^2)(lambda/w)^2 (Gamma/Delta) (P / hbar omega_0)`, rad/s.
pub fn ac_stark_shift_rate(params: &PhysicalParams, photon_rate: f64) -> f64 {
    24.0 / (PI * PI) * params.wavelength_ratio.powi(2) * params.linewidth_ratio * photon_rate
}

/// `omega_ac` for circulating power in watts (needs the wavelength).
pub fn ac_stark_shift(params: &PhysicalParams, power: f64) -> Result<f64> {
    Ok(ac_stark_shift_rate(params, power / params.photon_energy()?))
}

/// Round-trip absorption of `atoms` off-resonant atoms,
/// `(3/pi^2) N (lambda/w)^2 (Gamma/Delta)^2`, doubled at the antinodes.
pub fn absorption_epsilon(atoms: u64, wavelength_ratio: f64, linewidth_ratio: f64, antinodes: bool) -> f64 {
    let e = 3.0 / (PI * PI) * atoms as f64 * wavelength_ratio.powi(2) * linewidth_ratio.powi(2);
    if antinodes {
        2.0 * e
    } else {
        e
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optics::params::{rb85_linewidth_ratio, LightFlux};

    fn params(lw: f64, gd: f64) -> PhysicalParams {
        PhysicalParams {
            wavelength_ratio: lw,
            linewidth_ratio: gd,
            mirror_transmissivity: 5e-3,
            roundtrip_loss: 0.0,
            cavity_length: 0.026,
            detuning: 0.0,
            beam_splitter_transmissivity: 0.5,
            flux: LightFlux::PhotonRate(1e10),
            wavelength: Some(780e-9),
        }
    }

    #[test]
    fn phase_shift_values() {
        assert_eq!(phase_per_atom(&params(1e-2, 0.0)), 0.0);
        let d = phase_per_atom(&params(1e-2, 1.782e-3));
        assert!((d - 1.083_326_096e-7).abs() < 1e-15, "{d:e}");
        assert_eq!(phase_per_atom(&params(1e-2, -1.782e-3)), -d);
    }

    #[test]
    fn lossless_reflection_is_unimodular() {
        for k in 0..50 {
            let a = -3.0 + 0.13 * k as f64;
            assert!((cavity_reflection(a, 5e-3, 0.0).norm() - 1.0).abs() < 1e-14);
        }
        assert_eq!(cavity_reflection(0.0, 5e-3, 0.0), C64::new(1.0, 0.0));
    }

    #[test]
    fn reflection_first_order_form() {
        let t = 5e-3;
        // First order in eps/T and alpha/T only; at alpha ~ T/4 the form is off by ~30%.
        for (x, a) in [(0.01, 0.0025), (0.02, 0.005)] {
            let f = cavity_reflection(a * t, t, x * t);
            let approx = C64::new(1.0 - 2.0 * x, 4.0 * a);
            assert!((f - approx).norm() / approx.norm() < 0.02, "{f}");
        }
    }

    #[test]
    fn buildup_values() {
        let t = 5e-3;
        assert!((cavity_buildup(0.0, t, 0.0) - 800.0).abs() < 1e-9);
        let eps = 1.2e-6;
        let half = cavity_buildup((eps + t) / 2.0, t, eps);
        assert!((half / cavity_buildup(0.0, t, eps) - 0.5).abs() < 1e-12);
        for k in -20..=20 {
            let a = t * k as f64 / 20.0;
            let l = cavity_buildup(a, t, eps);
            let e = cavity_buildup_exact(a, t, eps);
            assert!((l - e).abs() / e < 0.01, "alpha {a}: {l} vs {e}");
        }
    }

    #[test]
    fn stark_shift_values() {
        let p = params(1e-2, 1.782e-3);
        assert_eq!(ac_stark_shift_rate(&p, 0.0), 0.0);
        let w = ac_stark_shift_rate(&p, 1e10);
        assert!((w - 4333.304382).abs() < 1e-5, "{w}");
        let w1 = ac_stark_shift(&p, 1e-9).unwrap();
        assert!((ac_stark_shift(&p, 2e-9).unwrap() - 2.0 * w1).abs() < 1e-12 * w1);
    }

    #[test]
    fn absorption_rb_working_point() {
        assert_eq!(absorption_epsilon(0, 7.8e-3, rb85_linewidth_ratio(), true), 0.0);
        let e = absorption_epsilon(10_000, 780e-9 / 100e-6, rb85_linewidth_ratio(), true);
        assert!((1.0e-6..=1.6e-6).contains(&e), "{e:e}");
        assert!((e - 1.174_974e-6).abs() < 1e-11, "{e:e}");
    }
}
