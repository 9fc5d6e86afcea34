use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::exec::{Exec, Path, ProtocolReport};
use super::states::{hyper_bell, Bell, HyperBell, PolBasis};
use crate::error::{Error, Result};
use crate::optics::{detect, hadamard_pol, hadamard_spatial, local, DetectSpec, ElementKind};
use crate::qnd::{xkerr_parity_pol, xkerr_parity_spatial, xkerr_spatial_analyzer, PhaseClass};
use crate::state::{Outcome, PureState, SubsystemLabel, SystemLayout, NORM_TOL};

/// Complete hyperentangled Bell-state analysis of photons `x` and `y`.
/// Polarization is detected; the paths stay in the layout, projected.
pub(crate) fn hbsa_steps(exec: &mut Exec, paths: Vec<Path>, x: &str, y: &str) -> Result<Vec<Path>> {
    let paths = exec.branch(paths, |p| xkerr_parity_spatial(&p.state, x, y))?;
    let paths = exec.map(paths, |s| hadamard_spatial(&hadamard_spatial(s, x)?, y))?;
    let paths = exec.branch(paths, |p| xkerr_spatial_analyzer(&p.state, x, y))?;
    let paths = exec.branch(paths, |p| xkerr_parity_pol(&p.state, x, y))?;
    let paths = exec.map(paths, |s| hadamard_pol(&hadamard_pol(s, x)?, y))?;
    let paths = exec.branch(paths, |p| detect(&p.state, x, DetectSpec::Polarization))?;
    exec.branch(paths, |p| detect(&p.state, y, DetectSpec::Polarization))
}

/// Reads the hyperentangled Bell label of `x, y` off an analysis record.
pub fn hbsa_label(record: &Outcome, x: &str, y: &str) -> Option<HyperBell> {
    let shifted = PhaseClass::Shifted.token_value();
    let spatial_even = record.get(&format!("S-QND[{x},{y}]"))? == shifted;
    let spatial_plus = PhaseClass::parse(record.get(&format!("SA[{x},{y}]"))?)?.is_even();
    let pol_even = record.get(&format!("P-QND[{x},{y}]"))? == shifted;
    let pol_plus = record.get(&format!("{x}.pol"))? == record.get(&format!("{y}.pol"))?;
    Some(HyperBell {
        pol: Bell::from_parts(pol_even, pol_plus),
        spatial: Bell::from_parts(spatial_even, spatial_plus),
    })
}

/// Result of analyzing a two-photon state.
#[derive(Debug, Clone)]
pub struct HbsaResult {
    /// Set when one label occurs with probability 1.
    pub label: Option<HyperBell>,
    pub report: ProtocolReport,
}

/// Analyzes photons `A` and `B` of `state`.
pub fn hbsa_with(exec: &mut Exec, state: &PureState) -> Result<HbsaResult> {
    let paths = exec.start(state.clone());
    let mut paths = hbsa_steps(exec, paths, "A", "B")?;
    for p in &mut paths {
        let label = hbsa_label(&p.record, "A", "B").expect("complete record");
        p.finish(label.to_string(), true);
    }
    let report = ProtocolReport::from_paths("hbsa", exec, paths, |_| Ok(None))?;
    let by = report.by_label();
    let label = match by.iter().next() {
        Some((l, p)) if by.len() == 1 && (p - 1.0).abs() < 1e-9 => l.parse().ok(),
        _ => None,
    };
    Ok(HbsaResult { label, report })
}

pub fn hbsa(state: &PureState) -> Result<HbsaResult> {
    hbsa_with(&mut Exec::Enumerate, state)
}

fn pol_correction(bell: Bell) -> Option<ElementKind> {
    match bell {
        Bell::PhiPlus => None,
        Bell::PhiMinus => Some(ElementKind::SigmaZPol),
        Bell::PsiPlus => Some(ElementKind::SigmaXPol),
        Bell::PsiMinus => Some(ElementKind::MinusISigmaYPol),
    }
}

fn path_correction(bell: Bell) -> Option<ElementKind> {
    match bell {
        Bell::PhiPlus => None,
        Bell::PhiMinus => Some(ElementKind::SigmaZSpatial),
        Bell::PsiPlus => Some(ElementKind::SigmaXSpatial),
        Bell::PsiMinus => Some(ElementKind::MinusISigmaYSpatial),
    }
}

/// Pauli frame correction on `photon` for an analyzed label.
pub(crate) fn apply_bell_corrections(p: &mut Path, photon: &str, label: HyperBell) -> Result<()> {
    for kind in [pol_correction(label.pol), path_correction(label.spatial)]
        .into_iter()
        .flatten()
    {
        p.correct(format!("{kind:?}({photon})"), |s| local(s, photon, kind))?;
    }
    Ok(())
}

/// Single-photon input `(a|H> + b|V>)(c|x1> + d|x2>)` for teleportation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TeleportInput {
    pub pol: [C64; 2],
    pub path: [C64; 2],
}

impl TeleportInput {
    pub fn new(pol: [C64; 2], path: [C64; 2]) -> Result<Self> {
        for (name, v) in [("polarization", pol), ("path", path)] {
            let n = v[0].norm_sqr() + v[1].norm_sqr();
            if (n - 1.0).abs() > NORM_TOL {
                return Err(Error::InvalidParameter(format!(
                    "{name} amplitudes have squared norm {n}"
                )));
            }
        }
        Ok(TeleportInput { pol, path })
    }

    pub fn state(&self, photon: &str) -> Result<PureState> {
        let layout = SystemLayout::register(vec![
            SubsystemLabel::polarization(photon),
            SubsystemLabel::spatial(photon),
        ])?;
        let amps = (0..4)
            .map(|i| self.pol[i >> 1] * self.path[i & 1])
            .collect();
        PureState::from_amplitudes(layout, amps)
    }
}

/// Teleports photon `A`'s two-DOF state to `C` through the channel shared by `B, C`.
/// The channel must have layout `[B.pol, B.path, C.pol, C.path]`.
pub fn teleport_with_channel(
    exec: &mut Exec,
    input: &TeleportInput,
    channel: &PureState,
) -> Result<ProtocolReport> {
    let expected = super::states::pair_layout("B", "C", PolBasis::Linear)?;
    if channel.layout() != &expected {
        return Err(Error::LayoutMismatch);
    }
    let target = input.state("C")?;
    let start = input.state("A")?.tensor(channel)?;
    let paths = exec.start(start);
    let mut paths = hbsa_steps(exec, paths, "A", "B")?;
    for p in &mut paths {
        let label = hbsa_label(&p.record, "A", "B").expect("complete record");
        apply_bell_corrections(p, "C", label)?;
        p.finish(label.to_string(), true);
    }
    let mut report = ProtocolReport::from_paths("teleport", exec, paths, |p| {
        Ok(Some(p.state.fidelity(&target)?))
    })?;
    let min = report.min_success_fidelity().unwrap_or(0.0);
    report.metrics.insert("min_fidelity".into(), min);
    report
        .metrics
        .insert("degraded".into(), if min < 1.0 - 1e-9 { 1.0 } else { 0.0 });
    Ok(report)
}

pub fn teleport_exec(exec: &mut Exec, input: &TeleportInput) -> Result<ProtocolReport> {
    let channel = hyper_bell(
        HyperBell {
            pol: Bell::PhiPlus,
            spatial: Bell::PhiPlus,
        },
        "B",
        "C",
        PolBasis::Linear,
    );
    teleport_with_channel(exec, input, &channel)
}

pub fn teleport(input: &TeleportInput) -> Result<ProtocolReport> {
    teleport_exec(&mut Exec::Enumerate, input)
}

/// Entanglement swapping: `A-B` and `C-D` share `phi+/phi+`; analyzing `B, C`
/// leaves `A-D` in `phi+/phi+` after corrections on `A`.
pub fn swap_exec(exec: &mut Exec) -> Result<ProtocolReport> {
    let phi = HyperBell {
        pol: Bell::PhiPlus,
        spatial: Bell::PhiPlus,
    };
    let start = hyper_bell(phi, "A", "B", PolBasis::Linear).tensor(&hyper_bell(
        phi,
        "C",
        "D",
        PolBasis::Linear,
    ))?;
    let target = hyper_bell(phi, "A", "D", PolBasis::Linear);
    let paths = exec.start(start);
    let mut paths = hbsa_steps(exec, paths, "B", "C")?;
    for p in &mut paths {
        let label = hbsa_label(&p.record, "B", "C").expect("complete record");
        apply_bell_corrections(p, "A", label)?;
        p.finish(label.to_string(), true);
    }
    let mut report = ProtocolReport::from_paths("swap", exec, paths, |p| {
        Ok(Some(p.state.fidelity(&target)?))
    })?;
    let min = report.min_success_fidelity().unwrap_or(0.0);
    report.metrics.insert("min_fidelity".into(), min);
    Ok(report)
}

pub fn swap() -> Result<ProtocolReport> {
    swap_exec(&mut Exec::Enumerate)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::matrix::c;

    #[test]
    fn identifies_phi_minus_psi_plus() {
        let label = HyperBell {
            pol: Bell::PhiMinus,
            spatial: Bell::PsiPlus,
        };
        let r = hbsa(&hyper_bell(label, "A", "B", PolBasis::Linear)).unwrap();
        assert_eq!(r.label, Some(label));
        r.report.check_complete().unwrap();
    }

    #[test]
    fn product_state_splits_over_labels() {
        let s = super::super::states::product_pair(
            "A",
            "B",
            PolBasis::Linear,
            [[c(1.0), c(0.0)], [c(0.0), c(0.0)]],
            [[c(1.0), c(0.0)], [c(0.0), c(0.0)]],
        )
        .unwrap();
        let r = hbsa(&s).unwrap();
        assert!(r.label.is_none());
        let by = r.report.by_label();
        assert_eq!(by.len(), 4);
        for p in by.values() {
            assert!((p - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn degraded_channel_is_flagged() {
        let input = TeleportInput::new([c(0.6), c(0.8)], [c(1.0), c(0.0)]).unwrap();
        let channel = super::super::states::product_pair(
            "B",
            "C",
            PolBasis::Linear,
            [[c(0.9), c(0.0)], [c(0.0), c(0.1)]],
            [[c(1.0), c(0.0)], [c(0.0), c(1.0)]],
        )
        .unwrap();
        let r = teleport_with_channel(&mut Exec::Enumerate, &input, &channel).unwrap();
        assert_eq!(r.metrics["degraded"], 1.0);
    }
}
