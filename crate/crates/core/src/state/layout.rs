use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest amplitude vector a layout may describe (14 qubit equivalents).
pub const MAX_AMPLITUDES: usize = 1 << 14;

/// Degree of freedom carried by a subsystem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dof {
    Polarization,
    Spatial,
    TimeBin,
    Spin,
    Arrival,
}

impl fmt::Display for Dof {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Dof::Polarization => "pol",
            Dof::Spatial => "path",
            Dof::TimeBin => "time",
            Dof::Spin => "spin",
            Dof::Arrival => "arrival",
        };
        f.write_str(s)
    }
}

/// Basis convention used to name the levels of a subsystem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BasisTag {
    /// H, V
    Linear,
    /// R, L
    Circular,
    /// x1, x2, x3, x1', x2'
    Path,
    /// S, L
    Bin,
    /// SS, SL, LS, LL
    Arrival,
    /// up, down
    Spin,
}

/// Identifies one subsystem of a register: carrier name, DOF, dimension and basis.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SubsystemLabel {
    pub carrier: String,
    pub dof: Dof,
    pub dim: usize,
    pub basis: BasisTag,
}

impl SubsystemLabel {
    pub fn new(carrier: &str, dof: Dof, basis: BasisTag, dim: usize) -> Result<Self> {
        let label = SubsystemLabel {
            carrier: carrier.to_string(),
            dof,
            dim,
            basis,
        };
        let bad = |reason: &str| Error::InvalidLabel {
            label: label.to_string(),
            reason: reason.to_string(),
        };
        if carrier.is_empty() {
            return Err(bad("empty carrier name"));
        }
        let ok = match (dof, basis) {
            (Dof::Polarization, BasisTag::Linear | BasisTag::Circular) => dim == 2,
            (Dof::Spatial, BasisTag::Path) => (2..=5).contains(&dim),
            (Dof::TimeBin, BasisTag::Bin) => dim == 2,
            (Dof::Spin, BasisTag::Spin) => dim == 2,
            (Dof::Arrival, BasisTag::Arrival) => dim == 4,
            _ => return Err(bad("basis does not fit the degree of freedom")),
        };
        if !ok {
            return Err(bad(&format!("dimension {dim} not allowed")));
        }
        Ok(label)
    }

    pub fn polarization(carrier: &str) -> Self {
        Self::new(carrier, Dof::Polarization, BasisTag::Linear, 2).expect("valid label")
    }

    pub fn circular(carrier: &str) -> Self {
        Self::new(carrier, Dof::Polarization, BasisTag::Circular, 2).expect("valid label")
    }

    pub fn spatial(carrier: &str) -> Self {
        Self::new(carrier, Dof::Spatial, BasisTag::Path, 2).expect("valid label")
    }

    pub fn timebin(carrier: &str) -> Self {
        Self::new(carrier, Dof::TimeBin, BasisTag::Bin, 2).expect("valid label")
    }

    pub fn spin(carrier: &str) -> Self {
        Self::new(carrier, Dof::Spin, BasisTag::Spin, 2).expect("valid label")
    }

    pub fn arrival(carrier: &str) -> Self {
        Self::new(carrier, Dof::Arrival, BasisTag::Arrival, 4).expect("valid label")
    }

    /// Same subsystem with a different dimension (spatial modes only).
    pub fn with_dim(&self, dim: usize) -> Result<Self> {
        Self::new(&self.carrier, self.dof, self.basis, dim)
    }

    pub fn with_carrier(&self, carrier: &str) -> Self {
        SubsystemLabel {
            carrier: carrier.to_string(),
            ..self.clone()
        }
    }

    pub fn same_slot(&self, other: &SubsystemLabel) -> bool {
        self.carrier == other.carrier && self.dof == other.dof
    }

    /// Human-readable name of basis level `k`.
    pub fn level_name(&self, k: usize) -> String {
        match self.basis {
            BasisTag::Linear => ["H", "V"][k].to_string(),
            BasisTag::Circular => ["R", "L"][k].to_string(),
            BasisTag::Bin => ["S", "L"][k].to_string(),
            BasisTag::Arrival => ["SS", "SL", "LS", "LL"][k].to_string(),
            BasisTag::Spin => ["up", "down"][k].to_string(),
            BasisTag::Path => {
                let c = self.carrier.to_lowercase();
                match k {
                    0..=2 => format!("{c}{}", k + 1),
                    _ => format!("{c}{}'", k - 2),
                }
            }
        }
    }
}

impl fmt::Display for SubsystemLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.carrier, self.dof)
    }
}

/// Ordered list of subsystems. The first registered subsystem is the most significant digit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<SubsystemLabel>", into = "Vec<SubsystemLabel>")]
pub struct SystemLayout {
    labels: Vec<SubsystemLabel>,
    strides: Vec<usize>,
    size: usize,
}

impl TryFrom<Vec<SubsystemLabel>> for SystemLayout {
    type Error = Error;

    fn try_from(labels: Vec<SubsystemLabel>) -> Result<Self> {
        Self::register(labels)
    }
}

impl From<SystemLayout> for Vec<SubsystemLabel> {
    fn from(l: SystemLayout) -> Self {
        l.labels
    }
}

impl SystemLayout {
    pub fn register(labels: Vec<SubsystemLabel>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::EmptyLayout);
        }
        Self::build(labels)
    }

    fn build(labels: Vec<SubsystemLabel>) -> Result<Self> {
        for (i, a) in labels.iter().enumerate() {
            if labels[..i].iter().any(|b| b.same_slot(a)) {
                return Err(Error::DuplicateSubsystem(a.to_string()));
            }
        }
        let mut size: usize = 1;
        for l in &labels {
            size = size.saturating_mul(l.dim);
        }
        if size > MAX_AMPLITUDES {
            return Err(Error::StateSpaceOverflow {
                size,
                limit: MAX_AMPLITUDES,
            });
        }
        let mut strides = vec![1; labels.len()];
        for i in (0..labels.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * labels[i + 1].dim;
        }
        Ok(SystemLayout {
            labels,
            strides,
            size,
        })
    }

    pub fn labels(&self) -> &[SubsystemLabel] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn dim(&self, pos: usize) -> usize {
        self.labels[pos].dim
    }

    pub fn stride(&self, pos: usize) -> usize {
        self.strides[pos]
    }

    /// Position of the subsystem `(carrier, dof)`.
    pub fn find(&self, carrier: &str, dof: Dof) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l.carrier == carrier && l.dof == dof)
            .ok_or_else(|| Error::SubsystemNotFound(format!("{carrier}.{dof}")))
    }

    pub fn position_of(&self, label: &SubsystemLabel) -> Result<usize> {
        let pos = self.find(&label.carrier, label.dof)?;
        if self.labels[pos].dim != label.dim {
            return Err(Error::DimensionMismatch {
                expected: self.labels[pos].dim,
                got: label.dim,
            });
        }
        Ok(pos)
    }

    pub fn contains(&self, carrier: &str, dof: Dof) -> bool {
        self.find(carrier, dof).is_ok()
    }

    /// Digit of subsystem `pos` in flat index `idx`.
    pub fn digit(&self, idx: usize, pos: usize) -> usize {
        (idx / self.strides[pos]) % self.labels[pos].dim
    }

    pub fn index_of(&self, digits: &[usize]) -> Result<usize> {
        if digits.len() != self.labels.len() {
            return Err(Error::DimensionMismatch {
                expected: self.labels.len(),
                got: digits.len(),
            });
        }
        let mut idx = 0;
        for (pos, &d) in digits.iter().enumerate() {
            if d >= self.labels[pos].dim {
                return Err(Error::DimensionMismatch {
                    expected: self.labels[pos].dim,
                    got: d + 1,
                });
            }
            idx += d * self.strides[pos];
        }
        Ok(idx)
    }

    /// Layout with `pos` replaced by `label`.
    pub fn replaced(&self, pos: usize, label: SubsystemLabel) -> Result<Self> {
        let mut labels = self.labels.clone();
        labels[pos] = label;
        Self::register(labels)
    }

    /// Layout without the listed positions. Removing everything leaves a
    /// scalar layout with a single amplitude.
    pub fn without(&self, positions: &[usize]) -> Result<Self> {
        let labels = self
            .labels
            .iter()
            .enumerate()
            .filter(|(i, _)| !positions.contains(i))
            .map(|(_, l)| l.clone())
            .collect();
        Self::build(labels)
    }

    /// Product layout `self ⊗ other`.
    pub fn tensor(&self, other: &SystemLayout) -> Result<Self> {
        let mut labels = self.labels.clone();
        labels.extend(other.labels.iter().cloned());
        Self::register(labels)
    }

    /// Flat offsets of every digit combination of `targets` (first target slowest),
    /// plus the base indices where all target digits are zero.
    pub fn split_indices(&self, targets: &[usize]) -> (Vec<usize>, Vec<usize>) {
        let mut offsets = vec![0usize];
        for &t in targets {
            let mut next = Vec::with_capacity(offsets.len() * self.dim(t));
            for &o in &offsets {
                for d in 0..self.dim(t) {
                    next.push(o + d * self.stride(t));
                }
            }
            offsets = next;
        }
        let mut bases = vec![0usize];
        for pos in (0..self.labels.len()).filter(|p| !targets.contains(p)) {
            let mut next = Vec::with_capacity(bases.len() * self.dim(pos));
            for &b in &bases {
                for d in 0..self.dim(pos) {
                    next.push(b + d * self.stride(pos));
                }
            }
            bases = next;
        }
        bases.sort_unstable();
        (offsets, bases)
    }
}
