//! Steady-state solver for beam-splitter/cavity networks, quadratic
//! Hamiltonian extraction and pair-selectivity analysis.

pub mod fit;
pub mod selectivity;
pub mod solver;
pub mod spec;

pub use fit::{box_grid, effective_classical_hamiltonian, network_energy, pair_grid, AtomCoupling, ClassicalHamiltonian};
pub use selectivity::{
    five_cavity_selectivity_report, pair_selectivity, scheduled_five_cavity, DetuningSchedule, PairSelectivity,
    SelectivityReport, DEFAULT_SELECTIVITY_THRESHOLD,
};
pub use solver::{solve_steady_state, CavityField, NetworkSolution};
pub use spec::{
    five_cavity_network, michelson_network, single_cavity_network, CavityTemplate, Edge, FiveCavityPhases, NetworkSpec,
    Node, Termination,
};
