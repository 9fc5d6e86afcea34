use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::matrix::{c, ZERO};
use crate::state::{Ensemble, PureState, SubsystemLabel, SystemLayout, NORM_TOL};

/// The four Bell states of one two-level DOF.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Bell {
    #[serde(rename = "phi+")]
    PhiPlus,
    #[serde(rename = "phi-")]
    PhiMinus,
    #[serde(rename = "psi+")]
    PsiPlus,
    #[serde(rename = "psi-")]
    PsiMinus,
}

impl Bell {
    pub const ALL: [Bell; 4] = [Bell::PhiPlus, Bell::PhiMinus, Bell::PsiPlus, Bell::PsiMinus];

    /// Amplitude of `|a b>` (unnormalized, entries 0 or +-1).
    pub fn amp(self, a: usize, b: usize) -> f64 {
        match (self, a == b) {
            (Bell::PhiPlus, true) => 1.0,
            (Bell::PhiMinus, true) => {
                if a == 0 {
                    1.0
                } else {
                    -1.0
                }
            }
            (Bell::PsiPlus, false) => 1.0,
            (Bell::PsiMinus, false) => {
                if a == 0 {
                    1.0
                } else {
                    -1.0
                }
            }
            _ => 0.0,
        }
    }

    pub fn from_parts(even: bool, plus: bool) -> Bell {
        match (even, plus) {
            (true, true) => Bell::PhiPlus,
            (true, false) => Bell::PhiMinus,
            (false, true) => Bell::PsiPlus,
            (false, false) => Bell::PsiMinus,
        }
    }

    /// Two-qubit Bell state on the given labels.
    pub fn state(self, a: SubsystemLabel, b: SubsystemLabel) -> PureState {
        let layout = SystemLayout::register(vec![a, b]).expect("two distinct labels");
        let amps = (0..4).map(|i| c(self.amp(i >> 1, i & 1))).collect();
        PureState::normalized(layout, amps).expect("bell state")
    }
}

impl fmt::Display for Bell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Bell::PhiPlus => "phi+",
            Bell::PhiMinus => "phi-",
            Bell::PsiPlus => "psi+",
            Bell::PsiMinus => "psi-",
        })
    }
}

impl FromStr for Bell {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Bell::ALL
            .into_iter()
            .find(|b| b.to_string() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown Bell label {s:?}")))
    }
}

/// Hyperentangled Bell state label: polarization part and spatial part.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct HyperBell {
    pub pol: Bell,
    pub spatial: Bell,
}

impl HyperBell {
    pub fn all() -> Vec<HyperBell> {
        Bell::ALL
            .iter()
            .flat_map(|&pol| {
                Bell::ALL
                    .iter()
                    .map(move |&spatial| HyperBell { pol, spatial })
            })
            .collect()
    }
}

impl fmt::Display for HyperBell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.pol, self.spatial)
    }
}

impl FromStr for HyperBell {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (p, q) = s
            .split_once('/')
            .ok_or_else(|| Error::InvalidParameter(format!("expected pol/spatial, got {s:?}")))?;
        Ok(HyperBell {
            pol: p.trim().parse()?,
            spatial: q.trim().parse()?,
        })
    }
}

/// Polarization labels in the linear or circular basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PolBasis {
    Linear,
    Circular,
}

pub fn pol_label(photon: &str, basis: PolBasis) -> SubsystemLabel {
    match basis {
        PolBasis::Linear => SubsystemLabel::polarization(photon),
        PolBasis::Circular => SubsystemLabel::circular(photon),
    }
}

/// Layout `[a.pol, a.path, b.pol, b.path]`.
pub fn pair_layout(a: &str, b: &str, basis: PolBasis) -> Result<SystemLayout> {
    SystemLayout::register(vec![
        pol_label(a, basis),
        SubsystemLabel::spatial(a),
        pol_label(b, basis),
        SubsystemLabel::spatial(b),
    ])
}

/// Two photons with polarization amplitudes `pol[ab]` and path amplitudes `path[ab]`.
pub fn product_pair(
    a: &str,
    b: &str,
    basis: PolBasis,
    pol: [[C64; 2]; 2],
    path: [[C64; 2]; 2],
) -> Result<PureState> {
    let layout = pair_layout(a, b, basis)?;
    let mut amps = vec![ZERO; 16];
    for (i, amp) in amps.iter_mut().enumerate() {
        let (pa, sa, pb, sb) = (i >> 3, (i >> 2) & 1, (i >> 1) & 1, i & 1);
        *amp = pol[pa][pb] * path[sa][sb];
    }
    PureState::normalized(layout, amps)
}

fn bell_amps(b: Bell) -> [[C64; 2]; 2] {
    let mut m = [[ZERO; 2]; 2];
    for (x, row) in m.iter_mut().enumerate() {
        for (y, v) in row.iter_mut().enumerate() {
            *v = c(b.amp(x, y));
        }
    }
    m
}

pub fn hyper_bell(label: HyperBell, a: &str, b: &str, basis: PolBasis) -> PureState {
    product_pair(a, b, basis, bell_amps(label.pol), bell_amps(label.spatial)).expect("bell pair")
}

/// Polarization-only Bell target on `a.pol, b.pol`.
pub fn pol_bell(bell: Bell, a: &str, b: &str, basis: PolBasis) -> PureState {
    bell.state(pol_label(a, basis), pol_label(b, basis))
}

pub fn path_bell(bell: Bell, a: &str, b: &str) -> PureState {
    bell.state(SubsystemLabel::spatial(a), SubsystemLabel::spatial(b))
}

fn check_pair(name: &str, x: f64, y: f64) -> Result<()> {
    if !x.is_finite() || !y.is_finite() || (x * x + y * y - 1.0).abs() > NORM_TOL {
        return Err(Error::InvalidParameter(format!(
            "{name}: squared amplitudes must sum to 1 (got {})",
            x * x + y * y
        )));
    }
    Ok(())
}

/// Real amplitudes of `(a|HH> + b|VV>)(g|x1y1> + d|x2y2>)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PartialParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
}

impl PartialParams {
    pub fn new(alpha: f64, beta: f64, gamma: f64, delta: f64) -> Result<Self> {
        let p = PartialParams {
            alpha,
            beta,
            gamma,
            delta,
        };
        p.validate()?;
        Ok(p)
    }

    /// From squared magnitudes with non-negative amplitudes.
    pub fn from_squares(alpha2: f64, gamma2: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha2) || !(0.0..=1.0).contains(&gamma2) {
            return Err(Error::InvalidParameter(
                "squared amplitudes must lie in [0, 1]".into(),
            ));
        }
        Ok(PartialParams {
            alpha: alpha2.sqrt(),
            beta: (1.0 - alpha2).sqrt(),
            gamma: gamma2.sqrt(),
            delta: (1.0 - gamma2).sqrt(),
        })
    }

    pub fn validate(&self) -> Result<()> {
        check_pair("alpha, beta", self.alpha, self.beta)?;
        check_pair("gamma, delta", self.gamma, self.delta)
    }

    pub fn state(&self, a: &str, b: &str, basis: PolBasis) -> Result<PureState> {
        self.validate()?;
        product_pair(
            a,
            b,
            basis,
            [[c(self.alpha), ZERO], [ZERO, c(self.beta)]],
            [[c(self.gamma), ZERO], [ZERO, c(self.delta)]],
        )
    }
}

/// Real amplitudes of `(a|HH> + b|VV>)(d|SS> + e|LL>)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimebinParams {
    pub alpha: f64,
    pub beta: f64,
    pub delta: f64,
    pub eta: f64,
}

impl TimebinParams {
    pub fn new(alpha: f64, beta: f64, delta: f64, eta: f64) -> Result<Self> {
        let p = TimebinParams {
            alpha,
            beta,
            delta,
            eta,
        };
        check_pair("alpha, beta", alpha, beta)?;
        check_pair("delta, eta", delta, eta)?;
        Ok(p)
    }

    /// Layout `[a.pol, a.time, b.pol, b.time]`.
    pub fn state(&self, a: &str, b: &str) -> Result<PureState> {
        check_pair("alpha, beta", self.alpha, self.beta)?;
        check_pair("delta, eta", self.delta, self.eta)?;
        let layout = SystemLayout::register(vec![
            SubsystemLabel::polarization(a),
            SubsystemLabel::timebin(a),
            SubsystemLabel::polarization(b),
            SubsystemLabel::timebin(b),
        ])?;
        let mut amps = vec![ZERO; 16];
        for (p, pa) in [(0, self.alpha), (1, self.beta)] {
            for (t, ta) in [(0, self.delta), (1, self.eta)] {
                amps[(p << 3) | (t << 2) | (p << 1) | t] = c(pa * ta);
            }
        }
        PureState::normalized(layout, amps)
    }
}

/// Mixed hyperentangled pair: polarization `phi+` with weight `f1` else `psi+`,
/// path `phi+` with weight `f2` else `phi-`. Polarization is circular.
pub fn mixed_hyper(f1: f64, f2: f64, a: &str, b: &str) -> Result<Ensemble> {
    for f in [f1, f2] {
        if !(0.0..=1.0).contains(&f) {
            return Err(Error::InvalidParameter(format!(
                "fidelity {f} outside [0, 1]"
            )));
        }
    }
    let mut members = Vec::new();
    for (wp, pol) in [(f1, Bell::PhiPlus), (1.0 - f1, Bell::PsiPlus)] {
        for (ws, spatial) in [(f2, Bell::PhiPlus), (1.0 - f2, Bell::PhiMinus)] {
            if wp * ws > 0.0 {
                members.push((
                    wp * ws,
                    hyper_bell(HyperBell { pol, spatial }, a, b, PolBasis::Circular),
                ));
            }
        }
    }
    Ensemble::from_unnormalized(members)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hyper_bell_amplitudes() {
        let s = hyper_bell(
            HyperBell {
                pol: Bell::PhiPlus,
                spatial: Bell::PhiPlus,
            },
            "A",
            "B",
            PolBasis::Linear,
        );
        for (d, want) in [
            ([0, 0, 0, 0], 0.5),
            ([1, 1, 1, 1], 0.5),
            ([0, 0, 1, 1], 0.0),
        ] {
            assert!((s.amplitude(&d).unwrap().re - want).abs() < 1e-15);
        }
    }

    #[test]
    fn partial_rejects_bad_norm() {
        assert!(matches!(
            PartialParams::new(0.8, 0.7, 0.6, 0.8),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn labels_round_trip() {
        for h in HyperBell::all() {
            assert_eq!(h.to_string().parse::<HyperBell>().unwrap(), h);
        }
    }

    #[test]
    fn mixed_weights() {
        let e = mixed_hyper(0.8, 0.7, "A", "B").unwrap();
        assert_eq!(e.members().len(), 4);
        let f = e
            .fidelity(&pol_bell(Bell::PhiPlus, "A", "B", PolBasis::Circular))
            .unwrap();
        assert!((f - 0.8).abs() < 1e-12);
    }
}
