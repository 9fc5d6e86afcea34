use std::f64::consts::FRAC_1_SQRT_2;

use serde::{Deserialize, Serialize};

use super::exec::{Exec, Path, ProtocolReport};
use super::states::{hyper_bell, Bell, HyperBell, PartialParams, PolBasis, TimebinParams};
use crate::error::{Error, Result};
use crate::optics::{
    arrival_class, bs_hom_parity, detect, hadamard_both, hadamard_pol, local, pbs_parity_check,
    pockels, split_polarization, ubs_split, unbalanced_interferometer, DetectSpec, ElementKind,
};
use crate::qnd::{xkerr_parity_pol, xkerr_parity_spatial};
use crate::state::matrix::{diagonal, ONE, ZERO};
use crate::state::{Branch, Dof, Outcome, PureState, SubsystemLabel, Token};

const BALANCE_TOL: f64 = 1e-12;

fn phi_phi(a: &str, b: &str, basis: PolBasis) -> PureState {
    hyper_bell(
        HyperBell {
            pol: Bell::PhiPlus,
            spatial: Bell::PhiPlus,
        },
        a,
        b,
        basis,
    )
}

/// Keeps paths whose `device` reported `keep`; the rest fail with `label`.
fn post_select(paths: &mut [Path], device: &str, keep: &str, label: &str) {
    for p in paths.iter_mut().filter(|p| p.is_active()) {
        if p.token(device) != Some(keep) {
            p.finish(label, false);
        }
    }
}

/// Index of a detected level: `H`/`c1` -> 0, `V`/`c2` -> 1.
fn level_bit(value: &str) -> usize {
    match value {
        "H" | "R" | "S" => 0,
        "V" | "L" => 1,
        v if v.ends_with('1') => 0,
        _ => 1,
    }
}

fn odd_detection(p: &Path, x: &str, y: &str, dof: Dof) -> bool {
    let vx = p.token(&format!("{x}.{dof}")).expect("detected");
    let vy = p.token(&format!("{y}.{dof}")).expect("detected");
    level_bit(vx) != level_bit(vy)
}

/// Phase-flip corrections on `target` for odd detection parities of `x, y`.
fn parity_corrections(p: &mut Path, x: &str, y: &str, target: &str) -> Result<()> {
    if odd_detection(p, x, y, Dof::Polarization) {
        p.correct(format!("SigmaZPol({target})"), |s| {
            local(s, target, ElementKind::SigmaZPol)
        })?;
    }
    if odd_detection(p, x, y, Dof::Spatial) {
        p.correct(format!("SigmaZSpatial({target})"), |s| {
            local(s, target, ElementKind::SigmaZSpatial)
        })?;
    }
    Ok(())
}

/// Success probability `4 min(a^2,b^2) min(g^2,d^2)` of the parameter-splitting scheme.
pub fn param_split_closed_form(p: &PartialParams) -> f64 {
    let (a2, b2) = (p.alpha * p.alpha, p.beta * p.beta);
    let (g2, d2) = (p.gamma * p.gamma, p.delta * p.delta);
    4.0 * a2.min(b2) * g2.min(d2)
}

/// Concentration of a known partially hyperentangled pair by splitting parameters.
///
/// Without `allow_permutation` the input must satisfy `|alpha| >= |beta|` and
/// `|gamma| <= |delta|`; with it, the labels are swapped on both photons first.
pub fn ecp_param_split_exec(
    exec: &mut Exec,
    params: &PartialParams,
    allow_permutation: bool,
) -> Result<ProtocolReport> {
    params.validate()?;
    let (mut a, mut b) = (params.alpha.abs(), params.beta.abs());
    let (mut g, mut d) = (params.gamma.abs(), params.delta.abs());
    let mut s = params.state("A", "B", PolBasis::Linear)?;
    let mut prep = Vec::new();
    if params.alpha * params.beta < 0.0 {
        s = local(&s, "A", ElementKind::SigmaZPol)?;
        prep.push("SigmaZPol(A)".to_string());
    }
    if params.gamma * params.delta < 0.0 {
        s = local(&s, "A", ElementKind::SigmaZSpatial)?;
        prep.push("SigmaZSpatial(A)".to_string());
    }
    let swap_pol = a < b - BALANCE_TOL;
    let swap_path = g > d + BALANCE_TOL;
    if (swap_pol || swap_path) && !allow_permutation {
        return Err(Error::InvalidParameter(
            "parameter ordering needs |alpha| >= |beta| and |gamma| <= |delta|".into(),
        ));
    }
    if swap_pol {
        for ph in ["A", "B"] {
            s = local(&s, ph, ElementKind::SigmaXPol)?;
        }
        std::mem::swap(&mut a, &mut b);
        prep.push("relabel H<->V".into());
    }
    if swap_path {
        for ph in ["A", "B"] {
            s = local(&s, ph, ElementKind::SigmaXSpatial)?;
        }
        std::mem::swap(&mut g, &mut d);
        prep.push("relabel path 1<->2".into());
    }
    let r = if d > 0.0 { (g / d).min(1.0) } else { 1.0 };
    s = ubs_split(&s, "A", r)?;
    let theta = if a > 0.0 {
        (b / a).clamp(-1.0, 1.0).acos()
    } else {
        0.0
    };
    s = split_polarization(&s, "A", theta)?;

    let mut paths = exec.start(s);
    for p in &mut paths {
        p.corrections = prep.clone();
    }
    let paths = exec.branch(paths, |p| {
        let pos = p.state.layout().find("A", Dof::Spatial)?;
        let mut proj = vec![(
            Token::new("A.path", "kept"),
            diagonal(&[ONE, ONE, ZERO, ZERO, ZERO]),
        )];
        for (k, name) in [(2, "a3"), (3, "a1'"), (4, "a2'")] {
            let mut dg = [ZERO; 5];
            dg[k] = ONE;
            proj.push((Token::new("A.path", name), diagonal(&dg)));
        }
        p.state.measure_projective(&[pos], &proj)
    })?;
    let mut paths = exec.each(paths, |p| {
        if p.token("A.path") != Some("kept") {
            p.finish(format!("fail:{}", p.token("A.path").unwrap_or("?")), false);
            return Ok(());
        }
        let pos = p.state.layout().find("A", Dof::Spatial)?;
        p.state = p
            .state
            .restrict(pos, &[0, 1], SubsystemLabel::spatial("A"))?;
        if swap_pol {
            for ph in ["A", "B"] {
                p.state = local(&p.state, ph, ElementKind::SigmaXPol)?;
            }
        }
        if swap_path {
            for ph in ["A", "B"] {
                p.state = local(&p.state, ph, ElementKind::SigmaXSpatial)?;
            }
        }
        p.finish("success", true);
        Ok(())
    })?;
    paths.retain(|p| p.probability > 0.0);
    let target = phi_phi("A", "B", PolBasis::Linear);
    let mut report = ProtocolReport::from_paths("ecp-param-split", exec, paths, |p| {
        if p.verdict.as_ref().is_some_and(|v| v.success) {
            Ok(Some(p.state.fidelity(&target)?))
        } else {
            Ok(None)
        }
    })?;
    report
        .metrics
        .insert("closed_form".into(), param_split_closed_form(params));
    Ok(report)
}

pub fn ecp_param_split(params: &PartialParams, allow_permutation: bool) -> Result<ProtocolReport> {
    ecp_param_split_exec(&mut Exec::Enumerate, params, allow_permutation)
}

/// `4 a^2 b^2 g^2 d^2`.
pub fn schmidt_linear_closed_form(p: &PartialParams) -> f64 {
    4.0 * (p.alpha * p.beta * p.gamma * p.delta).powi(2)
}

/// Two copies of an unknown partially hyperentangled pair, linear optics only.
pub fn ecp_schmidt_linear_exec(exec: &mut Exec, params: &PartialParams) -> Result<ProtocolReport> {
    let ab = params.state("A", "B", PolBasis::Linear)?;
    let cd = params.state("C", "D", PolBasis::Linear)?;
    let mut s = ab.tensor(&cd)?;
    for ph in ["C", "D"] {
        s = local(&s, ph, ElementKind::SigmaXPol)?;
    }
    let paths = exec.start(s);
    let mut paths = exec.branch(paths, |p| pbs_parity_check(&p.state, "A", "C"))?;
    post_select(&mut paths, "PBS[A,C]", "even", "fail:PBS-odd");
    let mut paths = exec.branch(paths, |p| bs_hom_parity(&p.state, "B", "D"))?;
    post_select(&mut paths, "BS[B,D]", "odd", "fail:BS-even");
    let paths = exec.map(paths, |s| hadamard_both(&hadamard_both(s, "C")?, "D"))?;
    let paths = exec.branch(paths, |p| detect(&p.state, "C", DetectSpec::PolSpatial))?;
    let paths = exec.branch(paths, |p| detect(&p.state, "D", DetectSpec::PolSpatial))?;
    let paths = exec.each(paths, |p| {
        parity_corrections(p, "C", "D", "B")?;
        p.finish("success", true);
        Ok(())
    })?;
    let target = phi_phi("A", "B", PolBasis::Linear);
    let mut report =
        ProtocolReport::from_paths("ecp-schmidt-linear", exec, paths, |p| match &p.verdict {
            Some(v) if v.success => Ok(Some(p.state.fidelity(&target)?)),
            _ => Ok(None),
        })?;
    report
        .metrics
        .insert("closed_form".into(), schmidt_linear_closed_form(params));
    Ok(report)
}

pub fn ecp_schmidt_linear(params: &PartialParams) -> Result<ProtocolReport> {
    ecp_schmidt_linear_exec(&mut Exec::Enumerate, params)
}

/// Per-DOF state of the iterative scheme: weight of the first Schmidt term, or done.
fn dof_recursion(u: f64, rounds: usize) -> Vec<f64> {
    // q[k] = probability the DOF is known maximal after k rounds, q[0] = 0
    let mut q = vec![0.0];
    let mut pending = 1.0;
    let mut u = u;
    for _ in 0..rounds {
        let even = u * u + (1.0 - u) * (1.0 - u);
        pending *= even;
        q.push(1.0 - pending);
        if even > 0.0 {
            u = u * u / even;
        }
    }
    q
}

/// Closed forms of the iterative cross-Kerr scheme.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterativeClosedForm {
    /// Success probability contributed by round `k` (index 0 is round 1).
    pub per_round: Vec<f64>,
    /// Cumulative success after `k` rounds.
    pub cumulative: Vec<f64>,
    /// Round-1 case probabilities: both even, polarization odd only, path odd only.
    pub first_round_cases: [f64; 3],
    /// Round-2 success split by round-1 case.
    pub second_round_by_case: [f64; 3],
}

pub fn qnd_iterative_closed_form(p: &PartialParams, rounds: usize) -> IterativeClosedForm {
    let (a2, b2) = (p.alpha * p.alpha, p.beta * p.beta);
    let (g2, d2) = (p.gamma * p.gamma, p.delta * p.delta);
    let qp = dof_recursion(a2, rounds);
    let qs = dof_recursion(g2, rounds);
    let cumulative: Vec<f64> = (1..=rounds).map(|k| qp[k] * qs[k]).collect();
    let per_round = (0..rounds)
        .map(|k| cumulative[k] - if k == 0 { 0.0 } else { cumulative[k - 1] })
        .collect();
    let sp = a2 * a2 + b2 * b2;
    let ss = g2 * g2 + d2 * d2;
    IterativeClosedForm {
        per_round,
        cumulative,
        first_round_cases: [sp * ss, 2.0 * a2 * b2 * ss, 2.0 * g2 * d2 * sp],
        second_round_by_case: [
            4.0 * (a2 * b2 * g2 * d2).powi(2) / (sp * ss),
            4.0 * (g2 * d2).powi(2) * a2 * b2 / ss,
            4.0 * (a2 * b2).powi(2) * g2 * d2 / sp,
        ],
    }
}

/// One round of the iterative scheme on pair `A, B`: pairs the state with an
/// identical copy, checks parities, detects the copy and corrects `B`.
/// Outcomes with the same parities and post-state are merged.
fn qnd_round(state: &PureState, round: usize) -> Result<Vec<Branch>> {
    let copy = state.relabel(&[("A", "C"), ("B", "D")])?;
    let s = state.tensor(&copy)?;
    let mut exec = Exec::Enumerate;
    let paths = exec.start(s);
    let paths = exec.branch(paths, |p| xkerr_parity_pol(&p.state, "A", "C"))?;
    let paths = exec.branch(paths, |p| xkerr_parity_spatial(&p.state, "B", "D"))?;
    let paths = exec.map(paths, |s| hadamard_both(&hadamard_both(s, "C")?, "D"))?;
    let paths = exec.branch(paths, |p| detect(&p.state, "C", DetectSpec::PolSpatial))?;
    let paths = exec.branch(paths, |p| detect(&p.state, "D", DetectSpec::PolSpatial))?;
    let paths = exec.each(paths, |p| parity_corrections(p, "C", "D", "B"))?;
    let mut out: Vec<Branch> = Vec::new();
    for p in paths {
        let pol = if p.token("P-QND[A,C]") == Some("shifted") {
            "even"
        } else {
            "odd"
        };
        let path = if p.token("S-QND[B,D]") == Some("shifted") {
            "even"
        } else {
            "odd"
        };
        let token = Token::new(format!("round{round}"), format!("pol={pol},path={path}"));
        match out
            .iter_mut()
            .find(|b| b.outcome.0[0] == token && b.state.approx_eq_up_to_phase(&p.state, 1e-9))
        {
            Some(b) => b.probability += p.probability,
            None => out.push(Branch {
                outcome: Outcome(vec![token]),
                probability: p.probability,
                state: p.state,
            }),
        }
    }
    Ok(out)
}

fn dof_done(record: &Outcome, dof: &str) -> bool {
    record
        .0
        .iter()
        .any(|t| t.device.starts_with("round") && t.value.contains(&format!("{dof}=odd")))
}

/// Iterative concentration with cross-Kerr parity checks. Each round pairs the
/// pending state with an identical copy; a DOF is finished once it shows odd parity.
pub fn ecp_qnd_iterative_exec(
    exec: &mut Exec,
    params: &PartialParams,
    rounds: usize,
) -> Result<ProtocolReport> {
    if rounds == 0 {
        return Err(Error::InvalidParameter("rounds must be at least 1".into()));
    }
    let mut paths = exec.start(params.state("A", "B", PolBasis::Linear)?);
    for k in 1..=rounds {
        paths = exec.branch(paths, |p| qnd_round(&p.state, k))?;
        paths = exec.each(paths, |p| {
            if dof_done(&p.record, "pol") && dof_done(&p.record, "path") {
                p.finish(format!("success:round{k}"), true);
            }
            Ok(())
        })?;
    }
    let paths = exec.each(paths, |p| {
        p.finish("pending", false);
        Ok(())
    })?;
    let target = phi_phi("A", "B", PolBasis::Linear);
    let mut report =
        ProtocolReport::from_paths("ecp-qnd-iterative", exec, paths, |p| match &p.verdict {
            Some(v) if v.success => Ok(Some(p.state.fidelity(&target)?)),
            _ => Ok(None),
        })?;
    let mut per_round = vec![0.0; rounds];
    let mut first = [0.0; 3];
    let mut second = [0.0; 3];
    for b in &report.branches {
        let case = match b.outcome.get("round1") {
            Some("pol=even,path=even") => Some(0),
            Some("pol=odd,path=even") => Some(1),
            Some("pol=even,path=odd") => Some(2),
            _ => None,
        };
        if let Some(c) = case {
            first[c] += b.probability;
        }
        if let Some(k) = b.label.strip_prefix("success:round") {
            let k: usize = k.parse().expect("round index");
            per_round[k - 1] += b.probability;
            if let (2, Some(c)) = (k, case) {
                second[c] += b.probability;
            }
        }
    }
    let mut cumulative = 0.0;
    for (k, p) in per_round.iter().enumerate() {
        cumulative += p;
        report.metrics.insert(format!("p_round{}", k + 1), *p);
        report
            .metrics
            .insert(format!("P_after{}", k + 1), cumulative);
    }
    for c in 0..3 {
        report.metrics.insert(format!("p1_case{}", c + 1), first[c]);
        report
            .metrics
            .insert(format!("p2_case{}", c + 1), second[c]);
    }
    Ok(report)
}

pub fn ecp_qnd_iterative(params: &PartialParams, rounds: usize) -> Result<ProtocolReport> {
    ecp_qnd_iterative_exec(&mut Exec::Enumerate, params, rounds)
}

/// `|a b d e|^2`.
pub fn timebin_closed_form(p: &TimebinParams) -> f64 {
    (p.alpha * p.beta * p.delta * p.eta).powi(2)
}

/// Corrections on photon `B` keyed by the detected polarizations of `C` and `D`.
pub fn timebin_table(c_pol: &str, d_pol: &str) -> &'static [ElementKind] {
    match (c_pol, d_pol) {
        ("H", "H") => &[],
        ("H", "V") => &[ElementKind::SigmaZTime, ElementKind::SigmaZPol],
        ("V", "H") => &[ElementKind::SigmaZPol],
        _ => &[ElementKind::SigmaZTime],
    }
}

/// Concentration of polarization-time-bin hyperentanglement from two copies.
/// Successful events leave `A, B` in `(HH + VV)(SS + LL)/2`.
pub fn ecp_timebin_exec(exec: &mut Exec, params: &TimebinParams) -> Result<ProtocolReport> {
    let mut s = params.state("A", "B")?.tensor(&params.state("C", "D")?)?;
    for ph in ["C", "D"] {
        s = local(&s, ph, ElementKind::SigmaXPol)?;
        s = local(&s, ph, ElementKind::SigmaXTime)?;
    }
    let paths = exec.start(s);
    let mut paths = exec.branch(paths, |p| pbs_parity_check(&p.state, "A", "C"))?;
    post_select(&mut paths, "PBS[A,C]", "even", "fail:PBS1-odd");
    let paths = exec.map(paths, |s| pockels(&pockels(s, "B", true)?, "D", true))?;
    let mut paths = exec.branch(paths, |p| pbs_parity_check(&p.state, "B", "D"))?;
    post_select(&mut paths, "PBS[B,D]", "even", "fail:PBS2-odd");
    let paths = exec.map(paths, |s| {
        let s = pockels(s, "B", true)?;
        let s = unbalanced_interferometer(&unbalanced_interferometer(&s, "C")?, "D")?;
        hadamard_pol(&hadamard_pol(&s, "C")?, "D")
    })?;
    let paths = exec.branch(paths, |p| detect(&p.state, "C", DetectSpec::PolArrival))?;
    let paths = exec.branch(paths, |p| detect(&p.state, "D", DetectSpec::PolArrival))?;
    let paths = exec.each(paths, |p| {
        let ca = p.token("C.arrival").expect("detected").to_string();
        let da = p.token("D.arrival").expect("detected").to_string();
        if arrival_class(&ca) != "middle" || arrival_class(&da) != "middle" {
            p.finish("fail:arrival", false);
            return Ok(());
        }
        let cp = p.token("C.pol").expect("detected").to_string();
        let dp = p.token("D.pol").expect("detected").to_string();
        for &kind in timebin_table(&cp, &dp) {
            p.correct(format!("{kind:?}(B)"), |s| local(s, "B", kind))?;
        }
        if (ca == "middle-") != (da == "middle-") {
            p.correct("SigmaZTime(B)".into(), |s| {
                local(s, "B", ElementKind::SigmaZTime)
            })?;
        }
        p.finish(format!("success:{cp}{dp}"), true);
        Ok(())
    })?;
    let h = FRAC_1_SQRT_2;
    let target = TimebinParams::new(h, h, h, h)?.state("A", "B")?;
    let mut report =
        ProtocolReport::from_paths("ecp-timebin", exec, paths, |p| match &p.verdict {
            Some(v) if v.success => Ok(Some(p.state.fidelity(&target)?)),
            _ => Ok(None),
        })?;
    report
        .metrics
        .insert("closed_form".into(), timebin_closed_form(params));
    Ok(report)
}

pub fn ecp_timebin(params: &TimebinParams) -> Result<ProtocolReport> {
    ecp_timebin_exec(&mut Exec::Enumerate, params)
}
