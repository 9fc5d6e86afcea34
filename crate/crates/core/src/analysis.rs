//! Exact enumeration, seeded Monte Carlo, parameter sweeps and oracle checks.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::protocols::{
    branch_key, ecp_qnd_iterative, efficiency_closed_form, epp_efficiency, epp_iterate,
    epp_iterate_closed_form, qnd_iterative_closed_form, BranchCache, Exec, Invocation,
    PartialParams, ProtocolReport,
};

/// Runs `inv` exactly and checks that branch probabilities sum to one.
pub fn enumerate(inv: &Invocation) -> Result<ProtocolReport> {
    let r = inv.run(&mut Exec::Enumerate)?;
    r.check_complete()?;
    Ok(r)
}

/// Generator for one trial: the seed fixes the key, the trial index the stream.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Outcome tallies of a Monte Carlo run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleReport {
    pub protocol: String,
    pub trials: u64,
    pub seed: u64,
    /// Trials per branch key (`label|outcome record`).
    pub counts: BTreeMap<String, u64>,
    pub successes: u64,
}

impl SampleReport {
    pub fn success_rate(&self) -> f64 {
        self.successes as f64 / self.trials as f64
    }
}

/// Draws `trials` independent trajectories. Results depend only on `seed`,
/// not on thread scheduling. Measurement expansions are memoized across trials.
pub fn sample(inv: &Invocation, trials: u64, seed: u64) -> Result<SampleReport> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be positive".into()));
    }
    let cache = BranchCache::default();
    let per_trial = |t: u64| -> Result<(String, bool)> {
        let mut rng = trial_rng(seed, t);
        let r = inv.run(&mut Exec::cached(&mut rng, &cache))?;
        let b = r
            .branches
            .first()
            .ok_or_else(|| Error::OracleMismatch("sampled run produced no branch".into()))?;
        Ok((branch_key(b), b.success))
    };
    let tallies = (0..trials)
        .into_par_iter()
        .map(|t| per_trial(t).map(|(k, s)| (BTreeMap::from([(k, 1u64)]), s as u64)))
        .try_reduce(
            || (BTreeMap::new(), 0),
            |(mut a, sa), (b, sb)| {
                for (k, v) in b {
                    *a.entry(k).or_insert(0) += v;
                }
                Ok((a, sa + sb))
            },
        )?;
    Ok(SampleReport {
        protocol: inv.name().to_string(),
        trials,
        seed,
        counts: tallies.0,
        successes: tallies.1,
    })
}

/// Per-key comparison of sampled frequencies with enumerated probabilities.
#[derive(Debug, Clone, Serialize)]
pub struct Agreement {
    pub key: String,
    pub probability: f64,
    pub frequency: f64,
    pub bound: f64,
    pub ok: bool,
}

/// Binomial check: `|f - p| <= 4 sqrt(p (1 - p) / N)` for every key, including
/// keys seen only by one side.
pub fn compare_sample(exact: &ProtocolReport, sampled: &SampleReport) -> Vec<Agreement> {
    let probs = exact.by_key();
    let n = sampled.trials as f64;
    let mut keys: Vec<&String> = probs.keys().chain(sampled.counts.keys()).collect();
    keys.sort();
    keys.dedup();
    keys.into_iter()
        .map(|k| {
            let p = probs.get(k).copied().unwrap_or(0.0);
            let f = sampled.counts.get(k).copied().unwrap_or(0) as f64 / n;
            let bound = 4.0 * (p * (1.0 - p) / n).sqrt();
            Agreement {
                key: k.clone(),
                probability: p,
                frequency: f,
                bound,
                ok: (f - p).abs() <= bound + 1e-12,
            }
        })
        .collect()
}

/// Rectangular numeric table with string metadata.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub metadata: BTreeMap<String, String>,
}

impl CurveTable {
    fn new(columns: &[&str]) -> Self {
        CurveTable {
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
            metadata: BTreeMap::new(),
        }
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }
}

/// Maximum deviation between an enumerated quantity and its closed form.
#[derive(Debug, Clone, Serialize)]
pub struct OracleCheck {
    pub name: String,
    pub points: usize,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Evaluates both sides on every grid point and records the worst gap.
pub fn compare_oracle<T>(
    name: &str,
    grid: &[T],
    tolerance: f64,
    mut exact: impl FnMut(&T) -> Result<Vec<f64>>,
    mut closed: impl FnMut(&T) -> Vec<f64>,
) -> Result<OracleCheck> {
    let mut worst: f64 = 0.0;
    for x in grid {
        let a = exact(x)?;
        let b = closed(x);
        if a.len() != b.len() {
            return Err(Error::OracleMismatch(format!(
                "{name}: {} exact values vs {} closed-form values",
                a.len(),
                b.len()
            )));
        }
        for (u, v) in a.iter().zip(&b) {
            worst = worst.max((u - v).abs());
        }
    }
    Ok(OracleCheck {
        name: name.to_string(),
        points: grid.len(),
        max_deviation: worst,
        tolerance,
        pass: worst <= tolerance,
    })
}

/// Three grid points used for cross-checks: first, middle and last.
fn probe_points<T: Clone>(grid: &[T]) -> Vec<T> {
    let mut idx = vec![0, grid.len() / 2, grid.len().saturating_sub(1)];
    idx.dedup();
    idx.into_iter().map(|i| grid[i].clone()).collect()
}

fn record_check(table: &mut CurveTable, check: &OracleCheck) -> Result<()> {
    table
        .metadata
        .insert("oracle_points".into(), check.points.to_string());
    table.metadata.insert(
        "oracle_max_deviation".into(),
        format!("{:e}", check.max_deviation),
    );
    if !check.pass {
        return Err(Error::OracleMismatch(format!(
            "{}: deviation {:e} exceeds {:e}",
            check.name, check.max_deviation, check.tolerance
        )));
    }
    Ok(())
}

/// Iterative cross-Kerr concentration: per-round and cumulative success versus
/// `alpha^2`, with `|gamma| = |alpha|` and `|delta| = |beta|`, for rounds `1..=rounds`.
pub fn curve_ecp_iteration(alpha2_grid: &[f64], rounds: usize) -> Result<CurveTable> {
    if alpha2_grid.is_empty() || rounds == 0 {
        return Err(Error::InvalidParameter("empty grid or zero rounds".into()));
    }
    if alpha2_grid.iter().any(|&a| !(a > 0.0 && a < 1.0)) {
        return Err(Error::InvalidParameter(
            "alpha^2 grid must lie in (0, 1)".into(),
        ));
    }
    let mut t = CurveTable::new(&["alpha2", "round", "p_round", "P_cumulative"]);
    for &a2 in alpha2_grid {
        let cf = qnd_iterative_closed_form(&PartialParams::from_squares(a2, a2)?, rounds);
        for k in 0..rounds {
            t.rows
                .push(vec![a2, (k + 1) as f64, cf.per_round[k], cf.cumulative[k]]);
        }
    }
    let check = compare_oracle(
        "ecp-iteration",
        &probe_points(alpha2_grid),
        1e-9,
        |&a2| {
            let r = ecp_qnd_iterative(&PartialParams::from_squares(a2, a2)?, rounds)?;
            Ok((1..=rounds)
                .map(|k| r.metrics[&format!("P_after{k}")])
                .collect())
        },
        |&a2| {
            qnd_iterative_closed_form(&PartialParams::from_squares(a2, a2).expect("valid"), rounds)
                .cumulative
        },
    )?;
    t.metadata.insert("curve".into(), "ecp-iteration".into());
    record_check(&mut t, &check)?;
    Ok(t)
}

/// Purification: per-DOF fidelity after each round versus the initial fidelity
/// (both DOFs start equal).
pub fn curve_epp_fidelity(f_grid: &[f64], rounds: usize) -> Result<CurveTable> {
    if f_grid.is_empty() || rounds == 0 {
        return Err(Error::InvalidParameter("empty grid or zero rounds".into()));
    }
    if f_grid.iter().any(|&f| f <= 0.5 || f > 1.0) {
        return Err(Error::InvalidParameter(
            "purification needs initial fidelities in (1/2, 1]".into(),
        ));
    }
    let mut t = CurveTable::new(&["F", "round", "F_pol", "F_path", "success_probability"]);
    for &f in f_grid {
        for r in epp_iterate_closed_form(f, f, rounds) {
            t.rows
                .push(vec![f, r.round as f64, r.f1, r.f2, r.success_probability]);
        }
    }
    let flatten = |rs: Vec<crate::protocols::EppRound>| {
        rs.into_iter()
            .flat_map(|r| [r.f1, r.f2, r.success_probability])
            .collect::<Vec<_>>()
    };
    let check = compare_oracle(
        "epp-fidelity",
        &probe_points(f_grid),
        1e-9,
        |&f| Ok(flatten(epp_iterate(f, f, rounds)?)),
        |&f| flatten(epp_iterate_closed_form(f, f, rounds)),
    )?;
    t.metadata.insert("curve".into(), "epp-fidelity".into());
    record_check(&mut t, &check)?;
    Ok(t)
}

/// Purification efficiency without (`Y0`) and with (`Y`) recombination of
/// single-DOF successes, on `(F1, F2)` pairs.
pub fn curve_epp_efficiency(grid: &[(f64, f64)]) -> Result<CurveTable> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("empty grid".into()));
    }
    let mut t = CurveTable::new(&["F1", "F2", "Y0", "Y"]);
    for &(f1, f2) in grid {
        let (y0, y) = efficiency_closed_form(f1, f2);
        t.rows.push(vec![f1, f2, y0, y]);
    }
    let check = compare_oracle(
        "epp-efficiency",
        &probe_points(grid),
        1e-9,
        |&(f1, f2)| {
            let (a, b) = epp_efficiency(f1, f2)?;
            Ok(vec![a, b])
        },
        |&(f1, f2)| {
            let (a, b) = efficiency_closed_form(f1, f2);
            vec![a, b]
        },
    )?;
    t.metadata.insert("curve".into(), "epp-efficiency".into());
    record_check(&mut t, &check)?;
    Ok(t)
}
