use std::f64::consts::PI;

use proptest::prelude::*;
use qcv_core::optics::params::{rb85_linewidth_ratio, PLANCK, SPEED_OF_LIGHT};
use qcv_core::optics::{
    ac_stark_shift, cavity_buildup_exact, intracavity_powers_at_phase, pair_coeffs, single_cavity_coeffs, LightFlux,
    PhysicalParams, PowerTier,
};

fn params(t: f64, ldk_over_t: f64, tb: f64) -> PhysicalParams {
    let l = 0.026;
    PhysicalParams {
        wavelength_ratio: 1e-2,
        linewidth_ratio: rb85_linewidth_ratio(),
        mirror_transmissivity: t,
        roundtrip_loss: 1e-3 * t,
        cavity_length: l,
        detuning: ldk_over_t * t / l,
        beam_splitter_transmissivity: tb,
        flux: LightFlux::PhotonRate(1e10),
        wavelength: Some(780e-9),
    }
}

fn detuning() -> impl Strategy<Value = f64> {
    prop_oneof![-2.0f64..-0.01, 0.01f64..2.0]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn chi_has_the_opposite_sign_of_the_detuning(t in 1e-4f64..0.05, f in detuning(), tb in 0.05f64..0.95) {
        let p = params(t, f, tb);
        let single = single_cavity_coeffs(&p, 1000).unwrap();
        let pair = pair_coeffs(&p).unwrap();
        prop_assert_eq!(single.chi.signum(), -f.signum());
        prop_assert_eq!(pair.chi.signum(), -f.signum());
        prop_assert!(single.omega > 0.0 && pair.omega > 0.0);
    }

    #[test]
    fn large_detuning_powers_are_even(
        t in 1e-4f64..0.05,
        f in detuning(),
        tb in 0.05f64..0.95,
        u1 in -0.3f64..0.3,
        u2 in -0.3f64..0.3,
    ) {
        let p = params(t, f, tb);
        let scale = p.length_detuning();
        let (phi1, phi2) = (u1 * scale, u2 * scale);
        let a = intracavity_powers_at_phase(&p, phi1, phi2, PowerTier::LargeDetuning);
        let b = intracavity_powers_at_phase(&p.with_detuning(-p.detuning), -phi1, -phi2, PowerTier::LargeDetuning);
        prop_assert!((a.gain1 - b.gain1).abs() <= 1e-12 * a.gain1.abs());
        prop_assert!((a.gain2 - b.gain2).abs() <= 1e-12 * a.gain2.abs());
    }

    #[test]
    fn lorentzian_tier_tracks_the_exact_one(f in 0.005f64..0.05, u1 in -0.1f64..0.1, u2 in -0.1f64..0.1) {
        // the Lorentzian form drops O((L dk / T)^2); it holds to 1% up to L dk = 0.05 T
        let p = params(5e-3, f, 0.5);
        let scale = p.length_detuning();
        let exact = intracavity_powers_at_phase(&p, u1 * scale, u2 * scale, PowerTier::Exact);
        let lor = intracavity_powers_at_phase(&p, u1 * scale, u2 * scale, PowerTier::Lorentzian);
        prop_assert!((exact.gain1 / lor.gain1 - 1.0).abs() < 0.01);
        prop_assert!((exact.gain2 / lor.gain2 - 1.0).abs() < 0.01);
    }
}

#[test]
fn resonant_buildup_is_four_over_t() {
    for t in [1e-4, 1e-3, 5e-3] {
        assert!((cavity_buildup_exact(0.0, t, 0.0) * t / 4.0 - 1.0).abs() < t);
    }
}

#[test]
fn light_shift_per_watt() {
    let p = params(5e-3, 0.5, 0.5);
    let photon = PLANCK * SPEED_OF_LIGHT / 780e-9;
    let want = 24.0 / (PI * PI) * 1e-4 * rb85_linewidth_ratio() * 1e-3 / photon;
    assert!((ac_stark_shift(&p, 1e-3).unwrap() / want - 1.0).abs() < 1e-12);
}
