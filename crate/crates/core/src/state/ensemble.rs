use serde::{Deserialize, Serialize};

use super::layout::SystemLayout;
use super::pure::{PureState, PROB_TOL};
use crate::error::{Error, Result};

/// Classical mixture of pure states sharing one layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ensemble {
    members: Vec<(f64, PureState)>,
}

impl Ensemble {
    /// Zero-weight members are dropped. Weights must sum to 1 within 1e-9.
    pub fn new(members: Vec<(f64, PureState)>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::WeightSum(0.0));
        }
        if let Some((w, _)) = members.iter().find(|(w, _)| *w < 0.0 || !w.is_finite()) {
            return Err(Error::NegativeWeight(*w));
        }
        let total: f64 = members.iter().map(|(w, _)| w).sum();
        if (total - 1.0).abs() > PROB_TOL {
            return Err(Error::WeightSum(total));
        }
        let layout = members[0].1.layout();
        if members.iter().any(|(_, s)| s.layout() != layout) {
            return Err(Error::LayoutMismatch);
        }
        Ok(Ensemble {
            members: members.into_iter().filter(|(w, _)| *w > 0.0).collect(),
        })
    }

    /// Renormalizes weights before validating.
    pub fn from_unnormalized(members: Vec<(f64, PureState)>) -> Result<Self> {
        let total: f64 = members.iter().map(|(w, _)| w).sum();
        if total <= 0.0 {
            return Err(Error::WeightSum(total));
        }
        Self::new(members.into_iter().map(|(w, s)| (w / total, s)).collect())
    }

    pub fn pure(s: PureState) -> Self {
        Ensemble {
            members: vec![(1.0, s)],
        }
    }

    pub fn members(&self) -> &[(f64, PureState)] {
        &self.members
    }

    pub fn layout(&self) -> &SystemLayout {
        self.members[0].1.layout()
    }

    pub fn fidelity(&self, target: &PureState) -> Result<f64> {
        self.members
            .iter()
            .map(|(w, s)| Ok(w * s.fidelity(target)?))
            .sum()
    }

    pub fn tensor(&self, other: &Ensemble) -> Result<Ensemble> {
        let mut members = Vec::with_capacity(self.members.len() * other.members.len());
        for (wa, a) in &self.members {
            for (wb, b) in &other.members {
                members.push((wa * wb, a.tensor(b)?));
            }
        }
        Ok(Ensemble { members })
    }

    pub fn relabel(&self, map: &[(&str, &str)]) -> Result<Ensemble> {
        let members = self
            .members
            .iter()
            .map(|(w, s)| Ok((*w, s.relabel(map)?)))
            .collect::<Result<_>>()?;
        Ok(Ensemble { members })
    }

    /// Merges members equal up to global phase.
    pub fn compressed(&self, tol: f64) -> Ensemble {
        let mut out: Vec<(f64, PureState)> = Vec::new();
        for (w, s) in &self.members {
            match out
                .iter_mut()
                .find(|(_, t)| t.approx_eq_up_to_phase(s, tol))
            {
                Some(slot) => slot.0 += w,
                None => out.push((*w, s.clone())),
            }
        }
        Ensemble { members: out }
    }
}
