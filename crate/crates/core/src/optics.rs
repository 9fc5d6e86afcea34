//! Linear-optical elements, parity checks and photon detection.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::matrix::{c, controlled, diagonal, isometry_deviation, real, ONE, ZERO};
use crate::state::{Branch, CMatrix, Dof, PureState, SubsystemLabel, Token, UNITARY_TOL};

/// Half-wave plates, phase shifters, beam splitters, Pockels cells and the
/// unbalanced interferometer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ElementKind {
    HadamardPol,
    HadamardSpatial,
    SigmaXPol,
    SigmaZPol,
    /// `|H><V| - |V><H|`
    MinusISigmaYPol,
    SigmaXSpatial,
    SigmaZSpatial,
    MinusISigmaYSpatial,
    SigmaXTime,
    SigmaZTime,
    /// `|H> -> cos t |H> + sin t |V>`
    Rotation {
        theta: f64,
    },
    /// Global pi phase on the photon.
    PhaseFlip,
    /// Unbalanced beam splitter on the second path mode, opening a third.
    Ubs {
        r: f64,
    },
    /// Polarization flip on the late (`L`) or early (`S`) time bin.
    PockelsLate,
    PockelsEarly,
    /// Time bin to arrival slot: `S -> (SS + SL)/sqrt2`, `L -> (LS + LL)/sqrt2`.
    UnbalancedInterferometer,
}

/// A validated element: kind, the DOFs it touches and its matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementOp {
    kind: ElementKind,
    dofs: Vec<Dof>,
    matrix: CMatrix,
}

fn hadamard() -> CMatrix {
    real(
        2,
        &[FRAC_1_SQRT_2, FRAC_1_SQRT_2, FRAC_1_SQRT_2, -FRAC_1_SQRT_2],
    )
}

fn sigma_x() -> CMatrix {
    real(2, &[0.0, 1.0, 1.0, 0.0])
}

fn sigma_z() -> CMatrix {
    real(2, &[1.0, 0.0, 0.0, -1.0])
}

fn minus_i_sigma_y() -> CMatrix {
    real(2, &[0.0, 1.0, -1.0, 0.0])
}

impl ElementOp {
    pub fn new(kind: ElementKind) -> Result<Self> {
        use ElementKind::*;
        let (dofs, matrix) = match kind {
            HadamardPol => (vec![Dof::Polarization], hadamard()),
            HadamardSpatial => (vec![Dof::Spatial], hadamard()),
            SigmaXPol => (vec![Dof::Polarization], sigma_x()),
            SigmaZPol => (vec![Dof::Polarization], sigma_z()),
            MinusISigmaYPol => (vec![Dof::Polarization], minus_i_sigma_y()),
            SigmaXSpatial => (vec![Dof::Spatial], sigma_x()),
            SigmaZSpatial => (vec![Dof::Spatial], sigma_z()),
            MinusISigmaYSpatial => (vec![Dof::Spatial], minus_i_sigma_y()),
            SigmaXTime => (vec![Dof::TimeBin], sigma_x()),
            SigmaZTime => (vec![Dof::TimeBin], sigma_z()),
            Rotation { theta } => {
                if !theta.is_finite() {
                    return Err(Error::InvalidParameter(format!("rotation angle {theta}")));
                }
                let (s, co) = theta.sin_cos();
                (vec![Dof::Polarization], real(2, &[co, -s, s, co]))
            }
            PhaseFlip => (vec![Dof::Polarization], real(2, &[-1.0, 0.0, 0.0, -1.0])),
            Ubs { r } => {
                if !(0.0..=1.0).contains(&r) {
                    return Err(Error::InvalidParameter(format!(
                        "beam splitter ratio {r} outside [0, 1]"
                    )));
                }
                let t = (1.0 - r * r).max(0.0).sqrt();
                let m = CMatrix::from_row_slice(3, 2, &[ONE, ZERO, ZERO, c(r), ZERO, c(t)]);
                (vec![Dof::Spatial], m)
            }
            PockelsLate => (
                vec![Dof::TimeBin, Dof::Polarization],
                controlled(&[CMatrix::identity(2, 2), sigma_x()]),
            ),
            PockelsEarly => (
                vec![Dof::TimeBin, Dof::Polarization],
                controlled(&[sigma_x(), CMatrix::identity(2, 2)]),
            ),
            UnbalancedInterferometer => {
                let s = c(FRAC_1_SQRT_2);
                let m = CMatrix::from_row_slice(4, 2, &[s, ZERO, s, ZERO, ZERO, s, ZERO, s]);
                (vec![Dof::TimeBin], m)
            }
        };
        let dev = isometry_deviation(&matrix);
        if dev > UNITARY_TOL {
            return Err(Error::NotIsometry(dev));
        }
        Ok(ElementOp { kind, dofs, matrix })
    }

    pub fn kind(&self) -> ElementKind {
        self.kind
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dofs(&self) -> &[Dof] {
        &self.dofs
    }

    fn is_expanding(&self) -> bool {
        self.matrix.nrows() != self.matrix.ncols()
    }
}

fn incompatible(op: &ElementOp, target: String, reason: &str) -> Error {
    Error::IncompatibleElement {
        element: format!("{:?}", op.kind),
        target,
        reason: reason.to_string(),
    }
}

/// Applies `op` to `photon`.
pub fn apply(state: &PureState, photon: &str, op: &ElementOp) -> Result<PureState> {
    let layout = state.layout();
    let positions: Vec<usize> = op
        .dofs
        .iter()
        .map(|&d| layout.find(photon, d))
        .collect::<Result<_>>()?;
    if op.is_expanding() {
        let pos = positions[0];
        let label = &layout.labels()[pos];
        let new_label = match op.kind {
            ElementKind::UnbalancedInterferometer => SubsystemLabel::arrival(photon),
            _ => {
                if label.dim != 2 {
                    return Err(incompatible(op, label.to_string(), "needs a two-mode path"));
                }
                label.with_dim(3)?
            }
        };
        return state.embed_trusted(pos, new_label, &op.matrix);
    }
    for &p in &positions {
        if layout.dim(p) != 2 {
            return Err(incompatible(
                op,
                layout.labels()[p].to_string(),
                "expects a two-level subsystem",
            ));
        }
    }
    Ok(state.apply_trusted(&positions, &op.matrix))
}

/// Shorthand for building and applying an element.
pub fn local(state: &PureState, photon: &str, kind: ElementKind) -> Result<PureState> {
    apply(state, photon, &ElementOp::new(kind)?)
}

pub fn hadamard_pol(state: &PureState, photon: &str) -> Result<PureState> {
    local(state, photon, ElementKind::HadamardPol)
}

pub fn hadamard_spatial(state: &PureState, photon: &str) -> Result<PureState> {
    local(state, photon, ElementKind::HadamardSpatial)
}

/// Hadamard on both polarization and path.
pub fn hadamard_both(state: &PureState, photon: &str) -> Result<PureState> {
    hadamard_spatial(&hadamard_pol(state, photon)?, photon)
}

pub fn pockels(state: &PureState, photon: &str, late: bool) -> Result<PureState> {
    let kind = if late {
        ElementKind::PockelsLate
    } else {
        ElementKind::PockelsEarly
    };
    local(state, photon, kind)
}

pub fn ubs_split(state: &PureState, photon: &str, r: f64) -> Result<PureState> {
    local(state, photon, ElementKind::Ubs { r })
}

pub fn unbalanced_interferometer(state: &PureState, photon: &str) -> Result<PureState> {
    if state.layout().contains(photon, Dof::Arrival) {
        return Err(Error::IncompatibleElement {
            element: "UnbalancedInterferometer".into(),
            target: photon.to_string(),
            reason: "time bins already expanded into arrival slots".into(),
        });
    }
    local(state, photon, ElementKind::UnbalancedInterferometer)
}

/// Rotates the horizontal component of the two kept path modes into the
/// vertical component of two new path modes.
///
/// The photon's path must have three modes `{x1, x2, x3}`; it is extended to
/// `{x1, x2, x3, x1', x2'}` and `|H, xk> -> cos t |H, xk> + sin t |V, xk'>`.
pub fn split_polarization(state: &PureState, photon: &str, theta: f64) -> Result<PureState> {
    let layout = state.layout();
    let pp = layout.find(photon, Dof::Polarization)?;
    let sp = layout.find(photon, Dof::Spatial)?;
    if layout.dim(sp) != 3 {
        return Err(Error::IncompatibleElement {
            element: "PolarizationSplit".into(),
            target: layout.labels()[sp].to_string(),
            reason: "needs a three-mode path".into(),
        });
    }
    let iso = CMatrix::from_fn(5, 3, |i, j| if i == j { ONE } else { ZERO });
    let label = layout.labels()[sp].with_dim(5)?;
    let s = state.embed_trusted(sp, label, &iso)?;
    let (sn, co) = theta.sin_cos();
    let mut m = CMatrix::identity(10, 10);
    for p in 0..2 {
        let h = p; // (H, xk)
        let v = 5 + p + 3; // (V, xk')
        m[(h, h)] = c(co);
        m[(v, h)] = c(sn);
        m[(h, v)] = c(-sn);
        m[(v, v)] = c(co);
    }
    Ok(s.apply_trusted(&[pp, sp], &m))
}

fn parity_projectors(device: &str) -> [(Token, CMatrix); 2] {
    [
        (
            Token::new(device, "even"),
            diagonal(&[ONE, ZERO, ZERO, ONE]),
        ),
        (Token::new(device, "odd"), diagonal(&[ZERO, ONE, ONE, ZERO])),
    ]
}

fn two_level_pair(state: &PureState, x: &str, y: &str, dof: Dof) -> Result<[usize; 2]> {
    let l = state.layout();
    let px = l.find(x, dof)?;
    let py = l.find(y, dof)?;
    for p in [px, py] {
        if l.dim(p) != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                got: l.dim(p),
            });
        }
    }
    Ok([px, py])
}

/// Polarization parity of photons `x` and `y` via a polarizing beam splitter.
/// Both branches are returned; callers post-select.
pub fn pbs_parity_check(state: &PureState, x: &str, y: &str) -> Result<Vec<Branch>> {
    let t = two_level_pair(state, x, y, Dof::Polarization)?;
    Ok(state.measure_trusted(&t, &parity_projectors(&format!("PBS[{x},{y}]"))))
}

/// Spatial parity of photons `x` and `y` via two-photon interference on a beam splitter.
pub fn bs_hom_parity(state: &PureState, x: &str, y: &str) -> Result<Vec<Branch>> {
    let t = two_level_pair(state, x, y, Dof::Spatial)?;
    Ok(state.measure_trusted(&t, &parity_projectors(&format!("BS[{x},{y}]"))))
}

/// What a detector resolves on one photon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectSpec {
    Polarization,
    Spatial,
    PolSpatial,
    Arrival,
    PolArrival,
}

impl DetectSpec {
    fn dofs(self) -> &'static [Dof] {
        match self {
            DetectSpec::Polarization => &[Dof::Polarization],
            DetectSpec::Spatial => &[Dof::Spatial],
            DetectSpec::PolSpatial => &[Dof::Polarization, Dof::Spatial],
            DetectSpec::Arrival => &[Dof::Arrival],
            DetectSpec::PolArrival => &[Dof::Polarization, Dof::Arrival],
        }
    }
}

/// Arrival-slot measurement basis: early, middle+, middle-, late.
pub fn arrival_basis() -> Vec<(String, Vec<C64>)> {
    let s = c(FRAC_1_SQRT_2);
    vec![
        ("early".into(), vec![ONE, ZERO, ZERO, ZERO]),
        ("middle+".into(), vec![ZERO, s, s, ZERO]),
        ("middle-".into(), vec![ZERO, s, -s, ZERO]),
        ("late".into(), vec![ZERO, ZERO, ZERO, ONE]),
    ]
}

/// Collapses `middle+` and `middle-` into one class.
pub fn arrival_class(value: &str) -> &str {
    if value.starts_with("middle") {
        "middle"
    } else {
        value
    }
}

fn level_basis(label: &SubsystemLabel) -> Vec<(String, Vec<C64>)> {
    if label.dof == Dof::Arrival {
        return arrival_basis();
    }
    (0..label.dim)
        .map(|k| {
            let mut v = vec![ZERO; label.dim];
            v[k] = ONE;
            (label.level_name(k), v)
        })
        .collect()
}

/// Destructive detection of `photon`. Each resolved DOF yields a token
/// `photon.dof = level`; the measured subsystems leave the layout.
pub fn detect(state: &PureState, photon: &str, spec: DetectSpec) -> Result<Vec<Branch>> {
    let layout = state.layout();
    let positions: Vec<usize> = spec
        .dofs()
        .iter()
        .map(|&d| layout.find(photon, d))
        .collect::<Result<_>>()?;
    let mut basis: Vec<(Vec<Token>, Vec<C64>)> = vec![(Vec::new(), vec![ONE])];
    for &p in &positions {
        let label = &layout.labels()[p];
        let device = format!("{photon}.{}", label.dof);
        let mut next = Vec::new();
        for (toks, v) in &basis {
            for (name, w) in level_basis(label) {
                let mut t = toks.clone();
                t.push(Token::new(device.clone(), name));
                let prod = v
                    .iter()
                    .flat_map(|a| w.iter().map(move |b| a * b))
                    .collect();
                next.push((t, prod));
            }
        }
        basis = next;
    }
    let joined: Vec<(Token, Vec<C64>)> = basis
        .iter()
        .enumerate()
        .map(|(i, (_, v))| (Token::new("", i.to_string()), v.clone()))
        .collect();
    let branches = state.measure_destructive_trusted(&positions, &joined)?;
    Ok(branches
        .into_iter()
        .map(|mut b| {
            let i: usize = b.outcome.0[0].value.parse().expect("index token");
            b.outcome.0 = basis[i].0.clone();
            b
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{superposition, SubsystemLabel as L};

    fn pol_pair(terms: &[(f64, [usize; 2])]) -> PureState {
        superposition(
            vec![L::polarization("A"), L::polarization("B")],
            &terms
                .iter()
                .map(|(a, d)| (c(*a), d.to_vec()))
                .collect::<Vec<_>>(),
        )
        .unwrap()
    }

    #[test]
    fn hadamard_twice_is_identity() {
        let s = pol_pair(&[(0.6, [0, 1]), (0.8, [1, 0])]);
        let t = hadamard_pol(&hadamard_pol(&s, "A").unwrap(), "A").unwrap();
        assert!(t.approx_eq_up_to_phase(&s, 1e-14));
    }

    #[test]
    fn pbs_parity_deterministic_on_phi() {
        let s = pol_pair(&[(1.0, [0, 0]), (1.0, [1, 1])]);
        let br = pbs_parity_check(&s, "A", "B").unwrap();
        assert_eq!(br.len(), 1);
        assert_eq!(br[0].outcome.get("PBS[A,B]"), Some("even"));
        assert!((br[0].probability - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ubs_rejects_bad_ratio() {
        assert!(matches!(
            ElementOp::new(ElementKind::Ubs { r: 1.5 }),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn element_on_missing_dof() {
        let s = pol_pair(&[(1.0, [0, 0])]);
        assert!(matches!(
            local(&s, "A", ElementKind::SigmaXTime),
            Err(Error::SubsystemNotFound(_))
        ));
    }

    #[test]
    fn ubs_then_split_extends_path() {
        let s = superposition(
            vec![L::polarization("A"), L::spatial("A")],
            &[(c(1.0), vec![0, 1])],
        )
        .unwrap();
        let s = ubs_split(&s, "A", 0.6).unwrap();
        assert!((s.level_probability(1, 1) - 0.36).abs() < 1e-12);
        let s = split_polarization(&s, "A", 0.3).unwrap();
        assert_eq!(s.layout().dim(1), 5);
        assert!((s.amplitude(&[1, 4]).unwrap().re - 0.6 * 0.3f64.sin()).abs() < 1e-12);
    }

    #[test]
    fn interferometer_twice_is_an_error() {
        let s = superposition(vec![L::timebin("A")], &[(c(1.0), vec![0])]).unwrap();
        let s = unbalanced_interferometer(&s, "A").unwrap();
        assert!(matches!(
            unbalanced_interferometer(&s, "A"),
            Err(Error::IncompatibleElement { .. })
        ));
    }

    #[test]
    fn early_and_middle_halves() {
        let s = superposition(
            vec![L::arrival("A")],
            &[(c(1.0), vec![0]), (c(1.0), vec![1])],
        )
        .unwrap();
        let br = detect(&s, "A", DetectSpec::Arrival).unwrap();
        let mut middle = 0.0;
        let mut early = 0.0;
        for b in &br {
            match arrival_class(b.outcome.get("A.arrival").unwrap()) {
                "middle" => middle += b.probability,
                "early" => early += b.probability,
                other => panic!("unexpected {other}"),
            }
        }
        assert!((middle - 0.5).abs() < 1e-12 && (early - 0.5).abs() < 1e-12);
    }

    #[test]
    fn detect_pol_and_path() {
        let s = superposition(
            vec![L::polarization("A"), L::spatial("A")],
            &[(c(1.0), vec![0, 0])],
        )
        .unwrap();
        let br = detect(&s, "A", DetectSpec::PolSpatial).unwrap();
        assert_eq!(br.len(), 1);
        assert_eq!(br[0].outcome.to_string(), "A.pol=H;A.path=a1");
        assert!(br[0].state.layout().is_empty());
    }
}
