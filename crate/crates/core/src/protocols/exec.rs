use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::{Branch, Ensemble, Outcome, PureState, PROB_TOL};

/// How measurement branches are followed.
pub enum Exec<'r> {
    /// Follow every branch with its exact probability.
    Enumerate,
    /// Follow one branch per measurement, drawn with the given generator.
    Sample(&'r mut ChaCha8Rng),
    /// As `Sample`, reusing measurement expansions stored in `cache`.
    Cached {
        rng: &'r mut ChaCha8Rng,
        cache: &'r BranchCache,
        step: usize,
    },
}

impl<'r> Exec<'r> {
    pub fn cached(rng: &'r mut ChaCha8Rng, cache: &'r BranchCache) -> Self {
        Exec::Cached {
            rng,
            cache,
            step: 0,
        }
    }

    pub fn is_sampling(&self) -> bool {
        !matches!(self, Exec::Enumerate)
    }
}

type CacheKey = (usize, Option<usize>, Outcome);

/// Measurement expansions shared by the sampled trials of one invocation.
/// A protocol's state at its `n`-th measurement is fixed by the ensemble
/// member and the outcome record, so expansions can be reused across trials.
#[derive(Debug, Default)]
pub struct BranchCache {
    map: Mutex<HashMap<CacheKey, Arc<Vec<Branch>>>>,
    steps: Mutex<HashMap<CacheKey, Arc<StepResult>>>,
}

type StepResult = (PureState, Vec<String>, Option<Verdict>);

impl BranchCache {
    pub fn len(&self) -> usize {
        self.map.lock().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Terminal classification of a path.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub label: String,
    pub success: bool,
}

/// One trajectory through a protocol.
#[derive(Debug, Clone)]
pub struct Path {
    pub record: Outcome,
    pub probability: f64,
    pub state: PureState,
    pub corrections: Vec<String>,
    pub verdict: Option<Verdict>,
    /// Index of the ensemble member the path started from.
    pub member: Option<usize>,
}

impl Path {
    pub fn new(state: PureState) -> Self {
        Path {
            record: Outcome::default(),
            probability: 1.0,
            state,
            corrections: Vec::new(),
            verdict: None,
            member: None,
        }
    }

    pub fn is_active(&self) -> bool {
        self.verdict.is_none()
    }

    pub fn finish(&mut self, label: impl Into<String>, success: bool) {
        self.verdict = Some(Verdict {
            label: label.into(),
            success,
        });
    }

    pub fn token(&self, device: &str) -> Option<&str> {
        self.record.get(device)
    }

    /// Applies `f` to the state and records `name` as a correction.
    pub fn correct(
        &mut self,
        name: String,
        f: impl FnOnce(&PureState) -> Result<PureState>,
    ) -> Result<()> {
        self.state = f(&self.state)?;
        self.corrections.push(name);
        Ok(())
    }
}

impl Exec<'_> {
    pub fn start(&mut self, state: PureState) -> Vec<Path> {
        vec![Path::new(state)]
    }

    /// One path per member when enumerating, one drawn member when sampling.
    pub fn start_ensemble(&mut self, ens: &Ensemble) -> Vec<Path> {
        let members = ens.members();
        let chosen: Vec<usize> = match self {
            Exec::Enumerate => (0..members.len()).collect(),
            Exec::Sample(rng) | Exec::Cached { rng, .. } => {
                let weights: Vec<f64> = members.iter().map(|(w, _)| *w).collect();
                vec![pick(rng, &weights)]
            }
        };
        chosen
            .into_iter()
            .map(|i| {
                let (w, s) = &members[i];
                let mut p = Path::new(s.clone());
                p.probability = *w;
                p.member = Some(i);
                p
            })
            .collect()
    }

    /// Paths over the product `a (x) b`, with member index `i * |b| + j` as in
    /// [`Ensemble::tensor`]. Sampling draws the two factors independently.
    pub fn start_product(&mut self, a: &Ensemble, b: &Ensemble) -> Result<Vec<Path>> {
        let (ma, mb) = (a.members(), b.members());
        let chosen: Vec<(usize, usize)> = match self {
            Exec::Enumerate => (0..ma.len())
                .flat_map(|i| (0..mb.len()).map(move |j| (i, j)))
                .collect(),
            Exec::Sample(rng) | Exec::Cached { rng, .. } => {
                let wa: Vec<f64> = ma.iter().map(|(w, _)| *w).collect();
                let wb: Vec<f64> = mb.iter().map(|(w, _)| *w).collect();
                let i = pick(rng, &wa);
                vec![(i, pick(rng, &wb))]
            }
        };
        chosen
            .into_iter()
            .map(|(i, j)| {
                let mut p = Path::new(ma[i].1.tensor(&mb[j].1)?);
                p.probability = ma[i].0 * mb[j].0;
                p.member = Some(i * mb.len() + j);
                Ok(p)
            })
            .collect()
    }

    /// Expands every active path through a measurement.
    pub fn branch(
        &mut self,
        paths: Vec<Path>,
        mut f: impl FnMut(&Path) -> Result<Vec<Branch>>,
    ) -> Result<Vec<Path>> {
        let mut out = Vec::with_capacity(paths.len() * 2);
        let step = match self {
            Exec::Cached { step, .. } => {
                *step += 1;
                *step
            }
            _ => 0,
        };
        for path in paths {
            if !path.is_active() {
                out.push(path);
                continue;
            }
            let branches = match self {
                Exec::Enumerate => expand(&mut f, &path)?,
                Exec::Sample(rng) => {
                    let mut bs = expand(&mut f, &path)?;
                    let k = pick(rng, &weights(&bs));
                    vec![bs.swap_remove(k)]
                }
                Exec::Cached { rng, cache, .. } => {
                    let key = (step, path.member, path.record.clone());
                    let hit = cache.map.lock().expect("cache lock").get(&key).cloned();
                    let bs = match hit {
                        Some(bs) => bs,
                        None => {
                            let bs = Arc::new(expand(&mut f, &path)?);
                            cache
                                .map
                                .lock()
                                .expect("cache lock")
                                .insert(key, bs.clone());
                            bs
                        }
                    };
                    let k = pick(rng, &weights(&bs));
                    vec![bs[k].clone()]
                }
            };
            for b in branches {
                let mut p = Path {
                    record: path.record.clone(),
                    probability: path.probability * b.probability,
                    state: b.state,
                    corrections: path.corrections.clone(),
                    verdict: None,
                    member: path.member,
                };
                p.record.extend(&b.outcome);
                out.push(p);
            }
        }
        Ok(out)
    }

    /// Applies `f` to every active path.
    pub fn each(
        &mut self,
        mut paths: Vec<Path>,
        mut f: impl FnMut(&mut Path) -> Result<()>,
    ) -> Result<Vec<Path>> {
        let cache = match self {
            Exec::Cached { cache, step, .. } => {
                *step += 1;
                Some((*cache, *step))
            }
            _ => None,
        };
        for p in paths.iter_mut().filter(|p| p.is_active()) {
            let Some((cache, step)) = cache else {
                f(p)?;
                continue;
            };
            let key = (step, p.member, p.record.clone());
            let hit = cache.steps.lock().expect("cache lock").get(&key).cloned();
            match hit {
                Some(r) => {
                    p.state = r.0.clone();
                    p.corrections = r.1.clone();
                    p.verdict = r.2.clone();
                }
                None => {
                    f(p)?;
                    let r = (p.state.clone(), p.corrections.clone(), p.verdict.clone());
                    cache
                        .steps
                        .lock()
                        .expect("cache lock")
                        .insert(key, Arc::new(r));
                }
            }
        }
        Ok(paths)
    }

    /// Applies a deterministic state map to every active path.
    pub fn map(
        &mut self,
        paths: Vec<Path>,
        mut f: impl FnMut(&PureState) -> Result<PureState>,
    ) -> Result<Vec<Path>> {
        self.each(paths, |p| {
            p.state = f(&p.state)?;
            Ok(())
        })
    }
}

fn expand(f: &mut impl FnMut(&Path) -> Result<Vec<Branch>>, path: &Path) -> Result<Vec<Branch>> {
    let branches = f(path)?;
    if branches.is_empty() {
        return Err(Error::OracleMismatch(format!(
            "measurement left no branch after {}",
            path.record
        )));
    }
    Ok(branches)
}

fn weights(bs: &[Branch]) -> Vec<f64> {
    bs.iter().map(|b| b.probability).collect()
}

fn pick(rng: &mut ChaCha8Rng, weights: &[f64]) -> usize {
    let total: f64 = weights.iter().sum();
    let u = rng.gen::<f64>() * total;
    let mut acc = 0.0;
    for (i, w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return i;
        }
    }
    weights.len() - 1
}

/// A finished branch as reported to callers.
#[derive(Debug, Clone, Serialize)]
pub struct ReportBranch {
    pub outcome: Outcome,
    pub probability: f64,
    pub label: String,
    pub success: bool,
    pub corrections: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fidelity: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub member: Option<usize>,
    #[serde(skip)]
    pub state: PureState,
}

/// Result of running a protocol once, exactly or as one sampled trajectory.
#[derive(Debug, Clone, Serialize)]
pub struct ProtocolReport {
    pub protocol: String,
    pub sampled: bool,
    pub success_probability: f64,
    pub branches: Vec<ReportBranch>,
    /// Named scalar results such as fidelities or per-case probabilities.
    pub metrics: BTreeMap<String, f64>,
}

impl ProtocolReport {
    /// Collects finished paths. Active paths are reported as `complete` successes.
    pub fn from_paths(
        protocol: &str,
        exec: &Exec,
        paths: Vec<Path>,
        mut fidelity: impl FnMut(&Path) -> Result<Option<f64>>,
    ) -> Result<Self> {
        let mut branches = Vec::with_capacity(paths.len());
        for p in paths {
            let fid = fidelity(&p)?;
            let v = p.verdict.clone().unwrap_or(Verdict {
                label: "complete".into(),
                success: true,
            });
            branches.push(ReportBranch {
                outcome: p.record,
                probability: p.probability,
                label: v.label,
                success: v.success,
                corrections: p.corrections,
                fidelity: fid,
                member: p.member,
                state: p.state,
            });
        }
        let success_probability = branches
            .iter()
            .filter(|b| b.success)
            .map(|b| b.probability)
            .sum();
        Ok(ProtocolReport {
            protocol: protocol.to_string(),
            sampled: exec.is_sampling(),
            success_probability,
            branches,
            metrics: BTreeMap::new(),
        })
    }

    pub fn total_probability(&self) -> f64 {
        self.branches.iter().map(|b| b.probability).sum()
    }

    /// Branch probabilities of an enumerated report must sum to one.
    pub fn check_complete(&self) -> Result<()> {
        let t = self.total_probability();
        if !self.sampled && (t - 1.0).abs() > PROB_TOL {
            return Err(Error::OracleMismatch(format!(
                "{}: branch probabilities sum to {t}",
                self.protocol
            )));
        }
        Ok(())
    }

    /// Probability aggregated by branch label.
    pub fn by_label(&self) -> BTreeMap<String, f64> {
        let mut m = BTreeMap::new();
        for b in &self.branches {
            *m.entry(b.label.clone()).or_insert(0.0) += b.probability;
        }
        m
    }

    /// Probability aggregated by the sampling key (label plus outcome record).
    pub fn by_key(&self) -> BTreeMap<String, f64> {
        let mut m = BTreeMap::new();
        for b in &self.branches {
            *m.entry(branch_key(b)).or_insert(0.0) += b.probability;
        }
        m
    }

    /// Smallest fidelity among successful branches.
    pub fn min_success_fidelity(&self) -> Option<f64> {
        self.branches
            .iter()
            .filter(|b| b.success)
            .filter_map(|b| b.fidelity)
            .reduce(f64::min)
    }

    /// Success-weighted mean fidelity.
    pub fn mean_success_fidelity(&self) -> Option<f64> {
        let mut w = 0.0;
        let mut acc = 0.0;
        for b in self.branches.iter().filter(|b| b.success) {
            if let Some(f) = b.fidelity {
                w += b.probability;
                acc += b.probability * f;
            }
        }
        (w > 0.0).then(|| acc / w)
    }

    /// Successful post-states as a normalized mixture.
    pub fn success_ensemble(&self) -> Result<Ensemble> {
        Ensemble::from_unnormalized(
            self.branches
                .iter()
                .filter(|b| b.success)
                .map(|b| (b.probability, b.state.clone()))
                .collect(),
        )
    }
}

/// Key identifying a branch in Monte Carlo tallies.
pub fn branch_key(b: &ReportBranch) -> String {
    format!("{}|{}", b.label, b.outcome)
}
