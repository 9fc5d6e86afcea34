use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::matrix::{diagonal, ONE, ZERO};
use crate::state::{Branch, Dof, PureState, Token};

/// Phase class read off the coherent probe after one or two cross-Kerr couplings.
/// Opposite phase shifts are not distinguished.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PhaseClass {
    Shifted,
    Unshifted,
    Theta13,
    Theta24,
    Theta14,
    Theta23,
}

impl PhaseClass {
    pub fn token_value(self) -> &'static str {
        match self {
            PhaseClass::Shifted => "shifted",
            PhaseClass::Unshifted => "unshifted",
            PhaseClass::Theta13 => "theta1+theta3",
            PhaseClass::Theta24 => "theta2+theta4",
            PhaseClass::Theta14 => "theta1+theta4",
            PhaseClass::Theta23 => "theta2+theta3",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            PhaseClass::Shifted,
            PhaseClass::Unshifted,
            PhaseClass::Theta13,
            PhaseClass::Theta24,
            PhaseClass::Theta14,
            PhaseClass::Theta23,
        ]
        .into_iter()
        .find(|c| c.token_value() == s)
    }

    /// Even parity for the two-way checks and the `11`/`22` analyzer classes.
    pub fn is_even(self) -> bool {
        matches!(
            self,
            PhaseClass::Shifted | PhaseClass::Theta13 | PhaseClass::Theta24
        )
    }
}

fn qubit_pair(state: &PureState, x: &str, y: &str, dof: Dof) -> Result<[usize; 2]> {
    let l = state.layout();
    let p = [l.find(x, dof)?, l.find(y, dof)?];
    for &q in &p {
        if l.dim(q) != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                got: l.dim(q),
            });
        }
    }
    Ok(p)
}

fn parity(state: &PureState, x: &str, y: &str, dof: Dof, device: String) -> Result<Vec<Branch>> {
    let t = qubit_pair(state, x, y, dof)?;
    let proj = [
        (
            Token::new(device.clone(), PhaseClass::Shifted.token_value()),
            diagonal(&[ONE, ZERO, ZERO, ONE]),
        ),
        (
            Token::new(device, PhaseClass::Unshifted.token_value()),
            diagonal(&[ZERO, ONE, ONE, ZERO]),
        ),
    ];
    Ok(state.measure_trusted(&t, &proj))
}

/// Polarization parity QND: even parity shifts the probe, odd parity does not.
pub fn xkerr_parity_pol(state: &PureState, x: &str, y: &str) -> Result<Vec<Branch>> {
    parity(state, x, y, Dof::Polarization, format!("P-QND[{x},{y}]"))
}

/// Spatial parity QND.
pub fn xkerr_parity_spatial(state: &PureState, x: &str, y: &str) -> Result<Vec<Branch>> {
    parity(state, x, y, Dof::Spatial, format!("S-QND[{x},{y}]"))
}

/// Four-outcome spatial analyzer: each path pair imprints a distinct phase sum.
pub fn xkerr_spatial_analyzer(state: &PureState, x: &str, y: &str) -> Result<Vec<Branch>> {
    let t = qubit_pair(state, x, y, Dof::Spatial)?;
    let device = format!("SA[{x},{y}]");
    let classes = [
        PhaseClass::Theta13,
        PhaseClass::Theta14,
        PhaseClass::Theta23,
        PhaseClass::Theta24,
    ];
    let proj: Vec<(Token, _)> = classes
        .iter()
        .enumerate()
        .map(|(k, cl)| {
            let mut d = [ZERO; 4];
            d[k] = ONE;
            (Token::new(device.clone(), cl.token_value()), diagonal(&d))
        })
        .collect();
    Ok(state.measure_trusted(&t, &proj))
}
