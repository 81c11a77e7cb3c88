//! Classical cavity optics: per-atom phase shifts, cavity input-output,
//! the two-cavity Michelson interferometer and the resulting spin
//! Hamiltonian coefficients.

pub mod cavity;
pub mod hamiltonian;
pub mod loss_series;
pub mod michelson;
pub mod params;

pub use cavity::{
    absorption_epsilon, ac_stark_shift, ac_stark_shift_rate, cavity_buildup, cavity_buildup_exact,
    cavity_reflection, phase_per_atom, CavityResponse,
};
pub use hamiltonian::{
    intracavity_powers, intracavity_powers_at_phase, pair_coeffs, pair_energy, single_cavity_coeffs,
    single_cavity_energy, HamiltonianCoeffs, IntracavityPowers, PowerTier, SingleCavityForm,
};
pub use michelson::{
    michelson_amplitudes, michelson_amplitudes_in, michelson_intensities, michelson_intensities_in,
    michelson_loss_estimate, LossEstimate, MichelsonAmplitudes, MichelsonGeometry, MichelsonIntensities,
};
pub use params::{LightFlux, PhysicalParams};
