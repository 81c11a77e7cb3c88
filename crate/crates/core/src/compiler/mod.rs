//! Pulse-sequence synthesis of polynomial spin Hamiltonians from linear,
//! twisting and pair primitives, and exact verification of the result.

pub mod generator;
pub mod lower;
pub mod poly;
pub mod sequence;
pub mod synth;
pub mod verify;

pub use generator::Generator;
pub use lower::{decompose, lower, lower_step, Decomposition, LoweredTerm};
pub use poly::{Axis, Letter, PolynomialHamiltonian};
pub use sequence::{Element, PulseSequence, SequenceMetadata, Step};
pub use synth::{
    balanced_commutator_gadget, commutator_of_blocks, conjugate_by_rotation,
    conjugate_by_rotations, expand_qnd, group_commutator_gadget, qnd_along, qnd_four_step,
    qnd_from_pair, qnd_segment_sum, rotation_step, rotation_to, synth_x3, synth_x3z, tact,
    trotter_compose, twist_along, CommutatorScheme, Rotation, SynthOptions, TactForm,
    TrotterOrder,
};
pub use verify::{
    effective_generator, exact_unitary, phase_aligned_distance, product_state_fidelities,
    sequence_to_unitary, state_fidelity, unitarity_deviation, SequenceEvaluator,
    MAX_UNITARY_DIM,
};
