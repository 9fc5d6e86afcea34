use serde::{Deserialize, Serialize};

use super::exec::{Exec, Path, ProtocolReport};
use super::states::{hyper_bell, mixed_hyper, path_bell, pol_bell, Bell, HyperBell, PolBasis};
use crate::error::{Error, Result};
use crate::optics::{
    detect, hadamard_both, hadamard_pol, hadamard_spatial, local, DetectSpec, ElementKind,
};
use crate::qnd::{ps_qnd, qsjm};
use crate::state::{Dof, Ensemble};

/// `F^2 / (F^2 + (1-F)^2)`.
pub fn purified(f: f64) -> f64 {
    f * f / (f * f + (1.0 - f) * (1.0 - f))
}

/// Probability that two copies agree in one DOF: `F^2 + (1-F)^2`.
pub fn agree(f: f64) -> f64 {
    f * f + (1.0 - f) * (1.0 - f)
}

/// Closed-form efficiencies `(Y0, Y)`: without recycling, and with the
/// single-DOF successes combined pairwise.
pub fn efficiency_closed_form(f1: f64, f2: f64) -> (f64, f64) {
    let (a1, a2) = (agree(f1), agree(f2));
    let y0 = a1 * a2;
    (y0, y0 + (a1 * (1.0 - a2)).min(a2 * (1.0 - a1)))
}

fn check_family(ens: &Ensemble, a: &str, b: &str) -> Result<()> {
    for (_, s) in ens.members() {
        let ok = [Bell::PhiPlus, Bell::PsiPlus].iter().any(|&pol| {
            [Bell::PhiPlus, Bell::PhiMinus].iter().any(|&spatial| {
                let t = hyper_bell(HyperBell { pol, spatial }, a, b, PolBasis::Circular);
                s.fidelity(&t).map(|f| f > 1.0 - 1e-9).unwrap_or(false)
            })
        });
        if !ok {
            return Err(Error::UnsupportedMember(
                "members must be phi+/psi+ in polarization and phi+/phi- in path".into(),
            ));
        }
    }
    Ok(())
}

fn pol_same(p: &Path) -> bool {
    p.token("PS-QND[A,C].e1") == p.token("PS-QND[B,D].e1")
}

fn path_same(p: &Path) -> bool {
    p.token("PS-QND[A,C].e2") == p.token("PS-QND[B,D].e2")
}

/// Fidelities of an ensemble or report branch set with `phi+` in each DOF of `a, b`.
pub fn dof_fidelities(ens: &Ensemble, a: &str, b: &str) -> Result<(f64, f64)> {
    Ok((
        ens.fidelity(&pol_bell(Bell::PhiPlus, a, b, PolBasis::Circular))?,
        ens.fidelity(&path_bell(Bell::PhiPlus, a, b))?,
    ))
}

/// One purification step on two copies of a mixed hyperentangled pair.
///
/// Labels: `case1` both DOFs agree (success), `case2` neither agrees (discard),
/// `case3` only polarization agrees, `case4` only the path agrees. The path
/// error of the output pairs is `psi+`.
pub fn epp_step1_exec(exec: &mut Exec, input: &Ensemble) -> Result<ProtocolReport> {
    check_family(input, "A", "B")?;
    let copy = input.relabel(&[("A", "C"), ("B", "D")])?;
    let paths = exec.start_product(input, &copy)?;
    let paths = exec.map(paths, |s| {
        let mut s = s.clone();
        for ph in ["A", "B", "C", "D"] {
            s = hadamard_pol(&s, ph)?;
        }
        Ok(s)
    })?;
    let paths = exec.branch(paths, |p| ps_qnd(&p.state, "A", "C"))?;
    let paths = exec.branch(paths, |p| ps_qnd(&p.state, "B", "D"))?;
    let paths = exec.each(paths, |p| {
        for ph in ["A", "B", "C", "D"] {
            p.state = hadamard_both(&p.state, ph)?;
        }
        if !pol_same(p) && !path_same(p) {
            p.finish("case2", false);
            return Ok(());
        }
        if p.token("PS-QND[A,C].e1") == Some("-") {
            for ph in ["C", "D"] {
                p.correct(format!("SigmaXPol({ph})"), |s| {
                    local(s, ph, ElementKind::SigmaXPol)
                })?;
            }
        }
        if p.token("PS-QND[A,C].e2") == Some("+") {
            for ph in ["C", "D"] {
                p.correct(format!("SigmaXSpatial({ph})"), |s| {
                    local(s, ph, ElementKind::SigmaXSpatial)
                })?;
            }
        }
        for ph in ["C", "D"] {
            p.state = hadamard_both(&p.state, ph)?;
        }
        Ok(())
    })?;
    let paths = exec.branch(paths, |p| detect(&p.state, "C", DetectSpec::PolSpatial))?;
    let paths = exec.branch(paths, |p| detect(&p.state, "D", DetectSpec::PolSpatial))?;
    let paths = exec.each(paths, |p| {
        for dof in [Dof::Polarization, Dof::Spatial] {
            let c = p.token(&format!("C.{dof}")).expect("detected");
            let d = p.token(&format!("D.{dof}")).expect("detected");
            let odd = c.trim_start_matches('c') != d.trim_start_matches('d');
            if odd {
                let kind = if dof == Dof::Polarization {
                    ElementKind::SigmaZPol
                } else {
                    ElementKind::SigmaZSpatial
                };
                p.correct(format!("{kind:?}(B)"), |s| local(s, "B", kind))?;
            }
        }
        let label = match (pol_same(p), path_same(p)) {
            (true, true) => "case1",
            (true, false) => "case3",
            _ => "case4",
        };
        p.finish(label, label == "case1");
        Ok(())
    })?;
    let pol_t = pol_bell(Bell::PhiPlus, "A", "B", PolBasis::Circular);
    let path_t = path_bell(Bell::PhiPlus, "A", "B");
    let mut report = ProtocolReport::from_paths("hyper-epp-step1", exec, paths, |p| {
        if p.verdict.as_ref().is_some_and(|v| v.label == "case1") {
            Ok(Some(p.state.fidelity(&pol_t)? * p.state.fidelity(&path_t)?))
        } else {
            Ok(None)
        }
    })?;
    let by = report.by_label();
    for c in ["case1", "case2", "case3", "case4"] {
        report
            .metrics
            .insert(format!("p_{c}"), by.get(c).copied().unwrap_or(0.0));
    }
    if !report.sampled {
        for c in ["case1", "case3", "case4"] {
            if let Ok(e) = case_ensemble(&report, c) {
                let (f1, f2) = dof_fidelities(&e, "A", "B")?;
                report.metrics.insert(format!("F1_{c}"), f1);
                report.metrics.insert(format!("F2_{c}"), f2);
            }
        }
    }
    Ok(report)
}

pub fn epp_step1(input: &Ensemble) -> Result<ProtocolReport> {
    epp_step1_exec(&mut Exec::Enumerate, input)
}

/// Output pairs of one case label as a normalized mixture.
pub fn case_ensemble(report: &ProtocolReport, label: &str) -> Result<Ensemble> {
    Ok(Ensemble::from_unnormalized(
        report
            .branches
            .iter()
            .filter(|b| b.label == label)
            .map(|b| (b.probability, b.state.clone()))
            .collect(),
    )?
    .compressed(1e-9))
}

/// Maps the `psi+` path error of an output pair back to `phi-` so it can re-enter.
pub fn rotate_path_error(ens: &Ensemble) -> Result<Ensemble> {
    let members = ens
        .members()
        .iter()
        .map(|(w, s)| Ok((*w, hadamard_spatial(&hadamard_spatial(s, "A")?, "B")?)))
        .collect::<Result<_>>()?;
    Ensemble::new(members)
}

/// Recombines a pair that is good in polarization (`pol_source`) with one that
/// is good in path (`path_source`). Both are pairs `A, B`; the second is moved
/// to photons `A2, B2`, which receive the polarization of `A, B` through one
/// joint measurement at each side.
pub fn epp_step2_exec(
    exec: &mut Exec,
    pol_source: &Ensemble,
    path_source: &Ensemble,
) -> Result<ProtocolReport> {
    let moved = path_source.relabel(&[("A", "A2"), ("B", "B2")])?;
    let paths = exec.start_product(pol_source, &moved)?;
    let paths = qsjm_step(exec, paths, "A", "A2")?;
    let mut paths = qsjm_step(exec, paths, "B", "B2")?;
    for p in &mut paths {
        p.finish("recombined", true);
    }
    let pol_t = pol_bell(Bell::PhiPlus, "A2", "B2", PolBasis::Circular);
    let path_t = path_bell(Bell::PhiPlus, "A2", "B2");
    let mut report = ProtocolReport::from_paths("hyper-epp-step2", exec, paths, |p| {
        Ok(Some(p.state.fidelity(&pol_t)? * p.state.fidelity(&path_t)?))
    })?;
    if !report.sampled {
        let out = report.success_ensemble()?;
        report.metrics.insert("F1".into(), out.fidelity(&pol_t)?);
        report.metrics.insert("F2".into(), out.fidelity(&path_t)?);
    }
    Ok(report)
}

pub fn epp_step2(pol_source: &Ensemble, path_source: &Ensemble) -> Result<ProtocolReport> {
    epp_step2_exec(&mut Exec::Enumerate, pol_source, path_source)
}

/// Per-round results of iterated purification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EppRound {
    pub round: usize,
    pub f1: f64,
    pub f2: f64,
    pub success_probability: f64,
}

/// Joint measurement moving the polarization of `a` onto `b`; the applied
/// corrections are noted from the outcome tokens.
fn qsjm_step(exec: &mut Exec, paths: Vec<Path>, a: &str, b: &str) -> Result<Vec<Path>> {
    let paths = exec.branch(paths, |p| {
        Ok(qsjm(&p.state, a, b)?
            .into_iter()
            .map(|q| q.branch)
            .collect())
    })?;
    let dev = format!("QSJM[{a}>{b}]");
    exec.each(paths, |p| {
        if p.token(&format!("{dev}.{a}")) == Some("L") {
            p.corrections.push(format!("sigma_x({b}.pol)"));
        }
        if p.token(&format!("{dev}.spin")) == Some("down") {
            p.corrections.push(format!("sigma_z({b}.pol)"));
        }
        Ok(())
    })
}

/// Iterates step 1 on the case-1 output, `rounds` times, by exact enumeration.
pub fn epp_iterate(f1: f64, f2: f64, rounds: usize) -> Result<Vec<EppRound>> {
    if f1 <= 0.5 || f2 <= 0.5 || f1 > 1.0 || f2 > 1.0 {
        return Err(Error::InvalidParameter(
            "purification needs initial fidelities in (1/2, 1]".into(),
        ));
    }
    let mut ens = mixed_hyper(f1, f2, "A", "B")?;
    let mut out = Vec::with_capacity(rounds);
    for round in 1..=rounds {
        let r = epp_step1(&ens)?;
        let case1 = case_ensemble(&r, "case1")?;
        let (g1, g2) = dof_fidelities(&case1, "A", "B")?;
        out.push(EppRound {
            round,
            f1: g1,
            f2: g2,
            success_probability: r.success_probability,
        });
        ens = rotate_path_error(&case1)?;
    }
    Ok(out)
}

/// Closed-form trajectory of `epp_iterate`.
pub fn epp_iterate_closed_form(f1: f64, f2: f64, rounds: usize) -> Vec<EppRound> {
    let (mut a, mut b) = (f1, f2);
    (1..=rounds)
        .map(|round| {
            let p = agree(a) * agree(b);
            a = purified(a);
            b = purified(b);
            EppRound {
                round,
                f1: a,
                f2: b,
                success_probability: p,
            }
        })
        .collect()
}

/// Efficiencies measured from an enumerated step: `(Y0, Y)`.
pub fn epp_efficiency(f1: f64, f2: f64) -> Result<(f64, f64)> {
    let r = epp_step1(&mixed_hyper(f1, f2, "A", "B")?)?;
    let y0 = r.metrics["p_case1"];
    Ok((y0, y0 + r.metrics["p_case3"].min(r.metrics["p_case4"])))
}
