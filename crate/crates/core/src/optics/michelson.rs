use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::cavity::cavity_reflection;
use super::params::PhysicalParams;
use crate::spin::C64;

/// Round-trip propagation phases `2 L_x k` (mod 2 pi) between the beam
/// splitter and the end element of arms `a`, `b`, `c`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MichelsonGeometry {
    pub roundtrip_a: f64,
    pub roundtrip_b: f64,
    pub roundtrip_c: f64,
}

impl Default for MichelsonGeometry {
    /// Cavity arms on a multiple of `2 pi`, mirror arm on an odd multiple of `pi`.
    fn default() -> Self {
        Self {
            roundtrip_a: 0.0,
            roundtrip_b: PI,
            roundtrip_c: 0.0,
        }
    }
}

/// Field amplitudes for unit input: `a`, `c` head into the cavity arms,
/// `b` into the mirror arm, `d` leaves through the output port.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MichelsonAmplitudes {
    pub a: C64,
    pub b: C64,
    pub c: C64,
    pub d: C64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MichelsonIntensities {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    /// Common denominator `|D|^2`.
    pub j: f64,
}

/// Round-trip phase deviations `alpha_{1,2} = phi_{1,2} + 2 L Delta k` of cavities 1 (arm a) and 2 (arm c).
pub fn cavity_phases(params: &PhysicalParams, phi1: f64, phi2: f64) -> (f64, f64) {
    let shift = 2.0 * params.length_detuning();
    (phi1 + shift, phi2 + shift)
}

fn reflections(params: &PhysicalParams, phi1: f64, phi2: f64) -> (C64, C64) {
    let (a1, a2) = cavity_phases(params, phi1, phi2);
    let t = params.mirror_transmissivity;
    let e = params.roundtrip_loss;
    (cavity_reflection(a1, t, e), cavity_reflection(a2, t, e))
}

/// Closed-form amplitudes in the default geometry.
pub fn michelson_amplitudes(params: &PhysicalParams, phi1: f64, phi2: f64) -> MichelsonAmplitudes {
    let (fa, fc) = reflections(params, phi1, phi2);
    michelson_amplitudes_in(params.beam_splitter_transmissivity, fa, fc, &MichelsonGeometry::default())
}

/// Closed-form amplitudes for given cavity reflections and geometry.
pub fn michelson_amplitudes_in(tb: f64, fa: C64, fc: C64, g: &MichelsonGeometry) -> MichelsonAmplitudes {
    let t = tb.sqrt();
    let r = (1.0 - tb).sqrt();
    let i = C64::new(0.0, 1.0);
    let one = C64::new(1.0, 0.0);
    let e = |x: f64| C64::from_polar(1.0, x);
    let (ea, eb) = (e(g.roundtrip_a), e(g.roundtrip_b));
    let ebc = e(g.roundtrip_b + g.roundtrip_c);
    let eac = e(g.roundtrip_a + g.roundtrip_c);
    let eabc = e(g.roundtrip_a + g.roundtrip_b + g.roundtrip_c);
    let den = one + ebc * fc * (r * r) - eac * fa * fc * (t * t);
    MichelsonAmplitudes {
        a: i * r * (one + ebc * fc) / den,
        b: t * (one - eac * fa * fc) / den,
        c: i * r * t * (eb + ea * fa) / den,
        d: (eb * (t * t) - ea * fa * (r * r) - eabc * fa * fc) / den,
    }
}

/// Intensities in the default geometry.
pub fn michelson_intensities(params: &PhysicalParams, phi1: f64, phi2: f64) -> MichelsonIntensities {
    let (fa, fc) = reflections(params, phi1, phi2);
    michelson_intensities_in(params.beam_splitter_transmissivity, fa, fc, &MichelsonGeometry::default())
}

/// Intensities from moduli and relative phases `delta_a = gamma_a + 2(L_a - L_b)k`,
/// `delta_c = gamma_c + 2(L_c + L_b)k`.
pub fn michelson_intensities_in(tb: f64, fa: C64, fc: C64, g: &MichelsonGeometry) -> MichelsonIntensities {
    let rb = 1.0 - tb;
    let (ma, mc) = (fa.norm(), fc.norm());
    let da = fa.arg() + g.roundtrip_a - g.roundtrip_b;
    let dc = fc.arg() + g.roundtrip_c + g.roundtrip_b;
    let j = 1.0 + rb * rb * mc * mc + tb * tb * ma * ma * mc * mc + 2.0 * rb * mc * dc.cos()
        - 2.0 * tb * ma * mc * (da + dc).cos()
        - 2.0 * rb * tb * ma * mc * mc * da.cos();
    let a = rb * (1.0 + mc * mc + 2.0 * mc * dc.cos()) / j;
    let b = tb * (1.0 + ma * ma * mc * mc - 2.0 * ma * mc * (da + dc).cos()) / j;
    let c = rb * tb * (1.0 + ma * ma + 2.0 * ma * da.cos()) / j;
    let d = (tb * tb + rb * rb * ma * ma + ma * ma * mc * mc - 2.0 * tb * ma * mc * (da + dc).cos()
        - 2.0 * rb * tb * ma * da.cos()
        + 2.0 * rb * ma * ma * mc * dc.cos())
        / j;
    MichelsonIntensities { a, b, c, d, j }
}

/// Linear loss estimate at the double resonance and the exact value there.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossEstimate {
    /// `1 - 4 ((1 - T_B)/(1 + T_B)) (eps/T)`.
    pub estimate: f64,
    /// `|d|^2` at `delta_a = delta_c = pi`, `gamma = 0`.
    pub exact: f64,
}

pub fn michelson_loss_estimate(tb: f64, eps: f64, t: f64) -> LossEstimate {
    let estimate = 1.0 - 4.0 * (1.0 - tb) / (1.0 + tb) * eps / t;
    if eps == 0.0 {
        // Lossless double resonance is 0/0 in closed form; the limit is unit return.
        return LossEstimate { estimate, exact: 1.0 };
    }
    let f = cavity_reflection(0.0, t, eps);
    let exact = michelson_intensities_in(tb, f, f, &MichelsonGeometry::default()).d;
    LossEstimate { estimate, exact }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optics::params::LightFlux;

    fn params(tb: f64, eps: f64) -> PhysicalParams {
        PhysicalParams {
            wavelength_ratio: 1e-2,
            linewidth_ratio: 1.78e-3,
            mirror_transmissivity: 5e-3,
            roundtrip_loss: eps,
            cavity_length: 0.026,
            detuning: 0.3,
            beam_splitter_transmissivity: tb,
            flux: LightFlux::PhotonRate(1e10),
            wavelength: None,
        }
    }

    #[test]
    fn lossless_conserves_energy() {
        for k in 0..40 {
            let p = params(0.1 + 0.02 * k as f64, 0.0);
            let phi = 1e-3 * k as f64;
            let amp = michelson_amplitudes(&p, phi, -0.7 * phi);
            assert!((amp.d.norm_sqr() - 1.0).abs() < 1e-12);
            let int = michelson_intensities(&p, phi, -0.7 * phi);
            assert!((int.d - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn intensities_match_amplitudes() {
        let p = params(0.37, 2e-5);
        let amp = michelson_amplitudes(&p, 3e-4, -1e-4);
        let int = michelson_intensities(&p, 3e-4, -1e-4);
        assert!((amp.a.norm_sqr() - int.a).abs() < 1e-12);
        assert!((amp.b.norm_sqr() - int.b).abs() < 1e-12);
        assert!((amp.c.norm_sqr() - int.c).abs() < 1e-12);
        assert!((amp.d.norm_sqr() - int.d).abs() < 1e-12);
        assert!(int.j > 0.0);
    }

    #[test]
    fn full_transmission_decouples_arm_a() {
        let amp = michelson_amplitudes(&params(1.0 - 1e-12, 1e-6), 0.0, 0.0);
        assert!(amp.a.norm_sqr() < 1e-10);
    }

    #[test]
    fn loss_estimate_limits() {
        assert_eq!(michelson_loss_estimate(1.0, 1e-6, 5e-3).estimate, 1.0);
        let l = michelson_loss_estimate(0.5, 0.0, 5e-3);
        assert_eq!(l.estimate, 1.0);
        assert!((l.exact - 1.0).abs() < 1e-12);
        let l = michelson_loss_estimate(0.5, 5e-5, 5e-3);
        assert!((l.estimate - l.exact).abs() < 5e-4, "{l:?}");
    }
}
