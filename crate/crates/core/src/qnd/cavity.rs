use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Input-output parameters of a charged quantum dot in a double-sided microcavity.
/// Frequencies and rates share one arbitrary unit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CavityParams {
    /// Probe frequency.
    pub omega: f64,
    /// Exciton transition frequency.
    pub omega_x: f64,
    /// Cavity mode frequency.
    pub omega_c: f64,
    /// Dot-cavity coupling strength.
    pub g: f64,
    /// Cavity field decay rate into each port.
    pub kappa: f64,
    /// Side leakage rate.
    pub kappa_s: f64,
    /// Exciton dipole decay rate.
    pub gamma: f64,
}

impl CavityParams {
    /// Resonant probe with no side leakage.
    pub fn resonant(g: f64, kappa: f64, gamma: f64) -> Self {
        CavityParams {
            omega: 0.0,
            omega_x: 0.0,
            omega_c: 0.0,
            g,
            kappa,
            kappa_s: 0.0,
            gamma,
        }
    }

    /// Same cavity with the dot decoupled.
    pub fn uncoupled(&self) -> Self {
        CavityParams { g: 0.0, ..*self }
    }
}

/// Reflection and transmission coefficients `(r, t)` with `r = 1 + t`.
pub fn qd_coefficients(p: &CavityParams) -> Result<(C64, C64)> {
    let vals = [
        p.omega, p.omega_x, p.omega_c, p.g, p.kappa, p.kappa_s, p.gamma,
    ];
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter(
            "cavity parameters must be finite".into(),
        ));
    }
    if p.kappa <= 0.0 || p.kappa_s < 0.0 || p.gamma < 0.0 || p.g < 0.0 {
        return Err(Error::InvalidParameter(
            "rates must be non-negative and kappa positive".into(),
        ));
    }
    let dot = C64::new(p.gamma / 2.0, p.omega_x - p.omega);
    let cav = C64::new(p.kappa + p.kappa_s / 2.0, p.omega_c - p.omega);
    let den = dot * cav + p.g * p.g;
    if den.norm() < 1e-300 {
        return Err(Error::InvalidParameter("vanishing denominator".into()));
    }
    let t = -p.kappa * dot / den;
    Ok((1.0 + t, t))
}
