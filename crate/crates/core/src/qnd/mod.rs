//! Cross-Kerr parity checks and quantum-dot spin devices.

mod cavity;
mod kerr;
mod spin;

pub use cavity::{qd_coefficients, CavityParams};
pub use kerr::{xkerr_parity_pol, xkerr_parity_spatial, xkerr_spatial_analyzer, PhaseClass};
pub use spin::{
    attach_spin, hybrid_cnot_block, ps_parity_qnd, ps_qnd, qd_scatter_ideal, qsjm, qsjm_pass,
    scatter_matrix, spin_hadamard, spin_measure, spin_phase_flip, spin_plus, QsjmBranch, SpinBasis,
};
