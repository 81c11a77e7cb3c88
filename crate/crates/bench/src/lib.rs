//! Workloads shared by the benchmarks.

use qcv_core::compiler::{synth_x3, SynthOptions};
use qcv_core::network::{five_cavity_network, selectivity::phase_candidates, CavityTemplate, NetworkSpec};
use qcv_core::{build_collective_ops, PulseSequence, SpinOperator, SpinSystem};

/// `Z^2 + 0.3 X` on `atoms` atoms.
pub fn twist_with_drive(atoms: u64) -> SpinOperator {
    let ops = build_collective_ops(SpinSystem::new(atoms).expect("atoms > 0"));
    (&(&ops.z * &ops.z) + &ops.x.scale_real(0.3))
        .into_hermitian()
        .expect("Hermitian by construction")
}

/// Gadget-synthesized `X^3` with a few hundred steps.
pub fn cubic_sequence() -> PulseSequence {
    synth_x3(0, 0.5, 0.1, 0.05, SynthOptions::default()).expect("valid step")
}

pub fn five_cavity() -> NetworkSpec {
    let cavity = CavityTemplate {
        mirror_transmissivity: 5e-3,
        roundtrip_loss: 1.2e-6,
        cavity_length: 0.026,
        detuning: 0.02 * 5e-3 / 0.026,
    };
    five_cavity_network(cavity, &phase_candidates()[0])
}
