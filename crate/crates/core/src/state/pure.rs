use std::fmt;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::layout::{Dof, SubsystemLabel, SystemLayout};
use super::matrix::{isometry_deviation, unitarity_deviation, CMatrix, ZERO};
use crate::error::{Error, Result};

pub const NORM_TOL: f64 = 1e-12;
pub const UNITARY_TOL: f64 = 1e-10;
pub const PROB_TOL: f64 = 1e-9;
/// Branches below this probability are dropped.
pub const BRANCH_CUTOFF: f64 = 1e-12;

/// One classical record entry: which device fired and what it reported.
/// Serialized as `"device=value"`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct Token {
    pub device: String,
    pub value: String,
}

impl Token {
    pub fn new(device: impl Into<String>, value: impl Into<String>) -> Self {
        Token {
            device: device.into(),
            value: value.into(),
        }
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}={}", self.device, self.value)
    }
}

impl From<Token> for String {
    fn from(t: Token) -> String {
        t.to_string()
    }
}

impl TryFrom<String> for Token {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        match s.split_once('=') {
            Some((d, v)) if !d.is_empty() => Ok(Token::new(d, v)),
            _ => Err(Error::InvalidLabel {
                label: s,
                reason: "expected device=value".into(),
            }),
        }
    }
}

/// Ordered record of measurement tokens along a branch.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Outcome(pub Vec<Token>);

impl Outcome {
    pub fn push(&mut self, t: Token) {
        self.0.push(t);
    }

    pub fn extend(&mut self, other: &Outcome) {
        self.0.extend(other.0.iter().cloned());
    }

    /// Value of the last token emitted by `device`.
    pub fn get(&self, device: &str) -> Option<&str> {
        self.0
            .iter()
            .rev()
            .find(|t| t.device == device)
            .map(|t| t.value.as_str())
    }

    pub fn key(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, t) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(";")?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

/// A measurement branch: outcome, probability and normalized post-state.
#[derive(Debug, Clone)]
pub struct Branch {
    pub outcome: Outcome,
    pub probability: f64,
    pub state: PureState,
}

/// Normalized amplitude vector over a registered layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PureState {
    layout: SystemLayout,
    amps: Vec<C64>,
}

fn norm_sqr(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

impl PureState {
    /// Amplitudes must already be normalized within `NORM_TOL`.
    pub fn from_amplitudes(layout: SystemLayout, amps: Vec<C64>) -> Result<Self> {
        if amps.len() != layout.size() {
            return Err(Error::DimensionMismatch {
                expected: layout.size(),
                got: amps.len(),
            });
        }
        let n = norm_sqr(&amps).sqrt();
        if (n - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(n));
        }
        Ok(PureState { layout, amps })
    }

    /// Rescales an arbitrary non-zero vector to unit norm.
    pub fn normalized(layout: SystemLayout, mut amps: Vec<C64>) -> Result<Self> {
        if amps.len() != layout.size() {
            return Err(Error::DimensionMismatch {
                expected: layout.size(),
                got: amps.len(),
            });
        }
        let n = norm_sqr(&amps).sqrt();
        if n < 1e-300 || !n.is_finite() {
            return Err(Error::NotNormalized(n));
        }
        amps.iter_mut().for_each(|z| *z /= n);
        Ok(PureState { layout, amps })
    }

    pub fn basis(layout: SystemLayout, digits: &[usize]) -> Result<Self> {
        let idx = layout.index_of(digits)?;
        let mut amps = vec![ZERO; layout.size()];
        amps[idx] = C64::new(1.0, 0.0);
        Ok(PureState { layout, amps })
    }

    /// Single-subsystem state from its amplitudes.
    pub fn single(label: SubsystemLabel, amps: &[C64]) -> Result<Self> {
        Self::from_amplitudes(SystemLayout::register(vec![label])?, amps.to_vec())
    }

    pub fn layout(&self) -> &SystemLayout {
        &self.layout
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        norm_sqr(&self.amps).sqrt()
    }

    pub fn amplitude(&self, digits: &[usize]) -> Result<C64> {
        Ok(self.amps[self.layout.index_of(digits)?])
    }

    pub fn find(&self, carrier: &str, dof: Dof) -> Result<usize> {
        self.layout.find(carrier, dof)
    }

    pub fn tensor(&self, other: &PureState) -> Result<PureState> {
        let layout = self.layout.tensor(&other.layout)?;
        let mut amps = Vec::with_capacity(layout.size());
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        Ok(PureState { layout, amps })
    }

    /// Renames carriers according to `map`; unmatched carriers are kept.
    pub fn relabel(&self, map: &[(&str, &str)]) -> Result<PureState> {
        let labels = self
            .layout
            .labels()
            .iter()
            .map(|l| match map.iter().find(|(from, _)| *from == l.carrier) {
                Some((_, to)) => l.with_carrier(to),
                None => l.clone(),
            })
            .collect();
        Ok(PureState {
            layout: SystemLayout::register(labels)?,
            amps: self.amps.clone(),
        })
    }

    /// Moves subsystems into the order given by `labels` (which must be a permutation).
    pub fn reorder(&self, labels: &[SubsystemLabel]) -> Result<PureState> {
        if labels.len() != self.layout.len() {
            return Err(Error::LayoutMismatch);
        }
        let perm: Vec<usize> = labels
            .iter()
            .map(|l| self.layout.position_of(l))
            .collect::<Result<_>>()?;
        let layout = SystemLayout::register(labels.to_vec())?;
        let mut amps = vec![ZERO; layout.size()];
        for (old_idx, a) in self.amps.iter().enumerate() {
            let mut new_idx = 0;
            for (new_pos, &old_pos) in perm.iter().enumerate() {
                new_idx += self.layout.digit(old_idx, old_pos) * layout.stride(new_pos);
            }
            amps[new_idx] = *a;
        }
        Ok(PureState { layout, amps })
    }

    fn check_targets(&self, targets: &[usize]) -> Result<usize> {
        let mut d = 1;
        for (i, &t) in targets.iter().enumerate() {
            if t >= self.layout.len() {
                return Err(Error::SubsystemNotFound(format!("position {t}")));
            }
            if targets[..i].contains(&t) {
                return Err(Error::DuplicateSubsystem(
                    self.layout.labels()[t].to_string(),
                ));
            }
            d *= self.layout.dim(t);
        }
        Ok(d)
    }

    /// Applies `m` to `targets` without validation. Result may be unnormalized.
    pub(crate) fn apply_raw(&self, targets: &[usize], m: &CMatrix) -> Vec<C64> {
        let (offsets, bases) = self.layout.split_indices(targets);
        let d = offsets.len();
        let mut out = vec![ZERO; self.amps.len()];
        let mut buf = vec![ZERO; d];
        for base in bases {
            let mut any = false;
            for (k, &o) in offsets.iter().enumerate() {
                buf[k] = self.amps[base + o];
                any |= buf[k] != ZERO;
            }
            if !any {
                continue;
            }
            for (i, &oi) in offsets.iter().enumerate() {
                let mut acc = ZERO;
                for (j, b) in buf.iter().enumerate() {
                    let mij = m[(i, j)];
                    if mij != ZERO {
                        acc += mij * b;
                    }
                }
                out[base + oi] = acc;
            }
        }
        out
    }

    /// Applies a unitary on the listed subsystem positions (first position slowest).
    pub fn apply_unitary(&self, targets: &[usize], m: &CMatrix) -> Result<PureState> {
        let d = self.check_targets(targets)?;
        if m.nrows() != d || m.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: m.nrows(),
            });
        }
        let dev = unitarity_deviation(m);
        if dev > UNITARY_TOL {
            return Err(Error::NotUnitary(dev));
        }
        Ok(self.apply_trusted(targets, m))
    }

    /// Applies a unitary that was validated when it was built.
    pub(crate) fn apply_trusted(&self, targets: &[usize], m: &CMatrix) -> PureState {
        PureState {
            layout: self.layout.clone(),
            amps: self.apply_raw(targets, m),
        }
    }

    /// Maps subsystem `pos` into `label.dim` levels through isometry `v` (new x old).
    pub fn embed(&self, pos: usize, label: SubsystemLabel, v: &CMatrix) -> Result<PureState> {
        let old = self.layout.dim(pos);
        if v.ncols() != old || v.nrows() != label.dim {
            return Err(Error::DimensionMismatch {
                expected: label.dim * old,
                got: v.nrows() * v.ncols(),
            });
        }
        let dev = isometry_deviation(v);
        if dev > UNITARY_TOL {
            return Err(Error::NotIsometry(dev));
        }
        self.embed_trusted(pos, label, v)
    }

    pub(crate) fn embed_trusted(
        &self,
        pos: usize,
        label: SubsystemLabel,
        v: &CMatrix,
    ) -> Result<PureState> {
        let layout = self.layout.replaced(pos, label)?;
        let mut amps = vec![ZERO; layout.size()];
        let (old_stride, new_stride) = (self.layout.stride(pos), layout.stride(pos));
        let (old_dim, new_dim) = (self.layout.dim(pos), layout.dim(pos));
        for (idx, a) in self.amps.iter().enumerate() {
            if *a == ZERO {
                continue;
            }
            let d = self.layout.digit(idx, pos);
            let hi = idx / (old_stride * old_dim);
            let lo = idx % old_stride;
            let base = hi * new_stride * new_dim + lo;
            for k in 0..new_dim {
                let vk = v[(k, d)];
                if vk != ZERO {
                    amps[base + k * new_stride] += vk * a;
                }
            }
        }
        Ok(PureState { layout, amps })
    }

    /// Keeps only `levels` of subsystem `pos`, which must carry all of the weight.
    pub fn restrict(
        &self,
        pos: usize,
        levels: &[usize],
        label: SubsystemLabel,
    ) -> Result<PureState> {
        if label.dim != levels.len() {
            return Err(Error::DimensionMismatch {
                expected: levels.len(),
                got: label.dim,
            });
        }
        let outside: f64 = self
            .amps
            .iter()
            .enumerate()
            .filter(|(i, _)| !levels.contains(&self.layout.digit(*i, pos)))
            .map(|(_, a)| a.norm_sqr())
            .sum();
        if outside > NORM_TOL {
            return Err(Error::NotNormalized(1.0 - outside));
        }
        let v = CMatrix::from_fn(levels.len(), self.layout.dim(pos), |k, d| {
            if levels[k] == d {
                C64::new(1.0, 0.0)
            } else {
                ZERO
            }
        });
        let mut s = self.embed_trusted(pos, label, &v)?;
        let n = s.norm();
        s.amps.iter_mut().for_each(|z| *z /= n);
        Ok(s)
    }

    /// Projective measurement. Each projector acts on `targets`; branches below the cutoff are dropped.
    pub fn measure_projective(
        &self,
        targets: &[usize],
        projectors: &[(Token, CMatrix)],
    ) -> Result<Vec<Branch>> {
        let d = self.check_targets(targets)?;
        let mut sum = CMatrix::zeros(d, d);
        for (tok, p) in projectors {
            if p.nrows() != d || p.ncols() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: p.nrows(),
                });
            }
            let herm = (p - p.adjoint())
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max);
            let idem = (p * p - p).iter().map(|z| z.norm()).fold(0.0, f64::max);
            if herm > UNITARY_TOL || idem > UNITARY_TOL {
                return Err(Error::InvalidProjector(tok.to_string()));
            }
            sum += p;
        }
        let deficiency = (CMatrix::identity(d, d) - sum).norm();
        if deficiency > UNITARY_TOL {
            return Err(Error::IncompleteProjectors(deficiency));
        }
        Ok(self.measure_trusted(targets, projectors))
    }

    pub(crate) fn measure_trusted(
        &self,
        targets: &[usize],
        projectors: &[(Token, CMatrix)],
    ) -> Vec<Branch> {
        let mut out = Vec::with_capacity(projectors.len());
        for (tok, p) in projectors {
            let mut amps = self.apply_raw(targets, p);
            let prob = norm_sqr(&amps);
            if prob < BRANCH_CUTOFF {
                continue;
            }
            let n = prob.sqrt();
            amps.iter_mut().for_each(|z| *z /= n);
            out.push(Branch {
                outcome: Outcome(vec![tok.clone()]),
                probability: prob,
                state: PureState {
                    layout: self.layout.clone(),
                    amps,
                },
            });
        }
        out
    }

    /// Destructive measurement of `targets` in an orthonormal basis. The measured
    /// subsystems are removed from the post-state layout.
    pub fn measure_destructive(
        &self,
        targets: &[usize],
        basis: &[(Token, Vec<C64>)],
    ) -> Result<Vec<Branch>> {
        let d = self.check_targets(targets)?;
        if basis.len() != d || basis.iter().any(|(_, v)| v.len() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: basis.len(),
            });
        }
        let mut dev: f64 = 0.0;
        for (i, (_, u)) in basis.iter().enumerate() {
            for (j, (_, v)) in basis.iter().enumerate() {
                let ip: C64 = u.iter().zip(v).map(|(a, b)| a.conj() * b).sum();
                let expect = if i == j { 1.0 } else { 0.0 };
                dev = dev.max((ip - expect).norm());
            }
        }
        if dev > UNITARY_TOL {
            return Err(Error::InvalidBasis(dev));
        }
        self.measure_destructive_trusted(targets, basis)
    }

    pub(crate) fn measure_destructive_trusted(
        &self,
        targets: &[usize],
        basis: &[(Token, Vec<C64>)],
    ) -> Result<Vec<Branch>> {
        let layout = self.layout.without(targets)?;
        let (offsets, bases) = self.layout.split_indices(targets);
        let mut out = Vec::new();
        for (tok, v) in basis {
            let amps: Vec<C64> = bases
                .iter()
                .map(|&b| {
                    offsets
                        .iter()
                        .zip(v)
                        .map(|(&o, vk)| vk.conj() * self.amps[b + o])
                        .sum()
                })
                .collect();
            let prob = norm_sqr(&amps);
            if prob < BRANCH_CUTOFF {
                continue;
            }
            let n = prob.sqrt();
            out.push(Branch {
                outcome: Outcome(vec![tok.clone()]),
                probability: prob,
                state: PureState {
                    layout: layout.clone(),
                    amps: amps.into_iter().map(|z| z / n).collect(),
                },
            });
        }
        Ok(out)
    }

    /// `<self|other>`; layouts must match exactly.
    pub fn inner(&self, other: &PureState) -> Result<C64> {
        if self.layout != other.layout {
            return Err(Error::LayoutMismatch);
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Equality up to a global phase.
    pub fn approx_eq_up_to_phase(&self, other: &PureState, tol: f64) -> bool {
        match self.inner(other) {
            Ok(ip) => (1.0 - ip.norm()).abs() <= tol,
            Err(_) => false,
        }
    }

    /// Fidelity of the reduced state on `target`'s subsystems with `target`.
    /// The target layout names the subsystems that are kept.
    pub fn fidelity(&self, target: &PureState) -> Result<f64> {
        let positions: Vec<usize> = target
            .layout
            .labels()
            .iter()
            .map(|l| self.layout.position_of(l))
            .collect::<Result<_>>()?;
        let (offsets, bases) = self.layout.split_indices(&positions);
        let f = bases
            .iter()
            .map(|&b| {
                offsets
                    .iter()
                    .zip(&target.amps)
                    .map(|(&o, t)| t.conj() * self.amps[b + o])
                    .sum::<C64>()
                    .norm_sqr()
            })
            .sum();
        Ok(f)
    }

    /// Probability that subsystem `pos` is found at `level`.
    pub fn level_probability(&self, pos: usize, level: usize) -> f64 {
        self.amps
            .iter()
            .enumerate()
            .filter(|(i, _)| self.layout.digit(*i, pos) == level)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }
}

/// Builds `sum_k amps[k] |digits_k>` over `labels`, normalizing the result.
pub fn superposition(
    labels: Vec<SubsystemLabel>,
    terms: &[(C64, Vec<usize>)],
) -> Result<PureState> {
    let layout = SystemLayout::register(labels)?;
    let mut amps = vec![ZERO; layout.size()];
    for (a, digits) in terms {
        amps[layout.index_of(digits)?] += a;
    }
    PureState::normalized(layout, amps)
}
