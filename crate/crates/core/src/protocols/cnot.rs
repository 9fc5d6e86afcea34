use super::exec::{Exec, ProtocolReport};
use super::states::{pair_layout, PolBasis};
use crate::error::{Error, Result};
use crate::optics::{hadamard_both, local, ElementKind};
use crate::qnd::{
    attach_spin, hybrid_cnot_block, spin_hadamard, spin_measure, spin_phase_flip, spin_plus,
    SpinBasis,
};
use crate::state::matrix::{controlled, real};
use crate::state::{CMatrix, Dof, PureState};

/// `CNOT_pol (x) CNOT_path` with `A` as control, applied directly.
pub fn cnot_reference(state: &PureState) -> Result<PureState> {
    let l = state.layout();
    let x = real(2, &[0.0, 1.0, 1.0, 0.0]);
    let cx = controlled(&[CMatrix::identity(2, 2), x]);
    let s = state.apply_unitary(
        &[
            l.find("A", Dof::Polarization)?,
            l.find("B", Dof::Polarization)?,
        ],
        &cx,
    )?;
    s.apply_unitary(
        &[l.find("A", Dof::Spatial)?, l.find("B", Dof::Spatial)?],
        &cx,
    )
}

/// Hyperparallel CNOT on photons `A` (control) and `B` (target) using two dot
/// spins. The input layout must be `[A.pol, A.path, B.pol, B.path]` with
/// circular polarization.
pub fn hyper_cnot_exec(exec: &mut Exec, input: &PureState) -> Result<ProtocolReport> {
    if input.layout() != &pair_layout("A", "B", PolBasis::Circular)? {
        return Err(Error::LayoutMismatch);
    }
    let expected = cnot_reference(input)?;
    let mut s = attach_spin(input, "e1", spin_plus())?;
    s = attach_spin(&s, "e2", spin_plus())?;
    s = hadamard_both(&s, "A")?;
    s = hybrid_cnot_block(&s, "A", "e1", "e2")?;
    s = spin_hadamard(&spin_hadamard(&s, "e1")?, "e2")?;
    s = hybrid_cnot_block(&s, "B", "e1", "e2")?;
    s = hadamard_both(&s, "A")?;
    // e2 is read out in the flipped frame
    s = spin_phase_flip(&s, "e2")?;
    s = spin_hadamard(&spin_hadamard(&s, "e1")?, "e2")?;
    let paths = exec.start(s);
    let paths = exec.branch(paths, |p| spin_measure(&p.state, "e1", SpinBasis::Z, "e1"))?;
    let paths = exec.branch(paths, |p| spin_measure(&p.state, "e2", SpinBasis::Z, "e2"))?;
    let paths = exec.each(paths, |p| {
        if p.token("e1") == Some("down") {
            p.correct("SigmaZPol(A)".into(), |s| {
                local(s, "A", ElementKind::SigmaZPol)
            })?;
        }
        if p.token("e2") == Some("up") {
            p.correct("SigmaZSpatial(A)".into(), |s| {
                local(s, "A", ElementKind::SigmaZSpatial)
            })?;
        }
        p.finish("success", true);
        Ok(())
    })?;
    let mut report = ProtocolReport::from_paths("hyper-cnot", exec, paths, |p| {
        Ok(Some(p.state.fidelity(&expected)?))
    })?;
    let min = report.min_success_fidelity().unwrap_or(0.0);
    report.metrics.insert("min_fidelity".into(), min);
    Ok(report)
}

pub fn hyper_cnot(input: &PureState) -> Result<ProtocolReport> {
    hyper_cnot_exec(&mut Exec::Enumerate, input)
}
