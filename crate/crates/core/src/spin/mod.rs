//! Collective spin operators, states and exact unitary dynamics on the
//! symmetric (Dicke) subspace of one or more atomic ensembles.

pub mod collective;
pub mod operator;
pub mod propagate;
pub mod quasi_cv;
pub mod state;
pub mod system;

pub use collective::{build_collective_ops, casimir_check, mode_ops, su2_deviation, CollectiveOps};
pub use operator::{embed, SpinOperator, C64};
pub use propagate::{evolve, Backend, Propagator, EIGEN_DIM_LIMIT};
pub use quasi_cv::{y_polarized, QuasiCv};
pub use state::{coherent_state, rotation_matrix, SpinState};
pub use system::{Space, SpinSystem};
