//! Qudit registers, pure states, ensembles and measurement.

mod ensemble;
mod layout;
pub mod matrix;
mod pure;

pub use ensemble::Ensemble;
pub use layout::{BasisTag, Dof, SubsystemLabel, SystemLayout, MAX_AMPLITUDES};
pub use matrix::CMatrix;
pub use pure::{
    superposition, Branch, Outcome, PureState, Token, BRANCH_CUTOFF, NORM_TOL, PROB_TOL,
    UNITARY_TOL,
};
