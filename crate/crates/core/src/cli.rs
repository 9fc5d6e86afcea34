//! Command-line front end: configuration, protocol registry and output rendering.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::{Path as FsPath, PathBuf};

use clap::{Parser, ValueEnum};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::analysis::{
    curve_ecp_iteration, curve_epp_efficiency, curve_epp_fidelity, enumerate, sample, CurveTable,
    SampleReport,
};
use crate::error::Error;
use crate::protocols::{
    epp_iterate, pair_layout, Bell, HyperBell, Invocation, PartialParams, PolBasis, ProtocolReport,
    TeleportInput, TimebinParams,
};
use crate::qnd::{qd_coefficients, CavityParams};
use crate::state::PureState;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Exact,
    Sample,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Exact => "exact",
            Mode::Sample => "sample",
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    #[default]
    Json,
}

/// A complete run request, as read from `--config` and overridden by flags.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub protocol: String,
    #[serde(default)]
    pub parameters: BTreeMap<String, Value>,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default)]
    pub trials: Option<u64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
}

/// Failure with the process exit code it maps to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub const UNKNOWN_PROTOCOL: u8 = 2;
    pub const INVALID: u8 = 3;
    pub const IO: u8 = 4;
    pub const INTERNAL: u8 = 1;

    fn unknown(name: &str) -> Self {
        CliError {
            code: Self::UNKNOWN_PROTOCOL,
            message: format!("unknown protocol '{name}' (see --list)"),
        }
    }

    fn invalid(message: impl Into<String>) -> Self {
        CliError {
            code: Self::INVALID,
            message: message.into(),
        }
    }

    fn io(message: impl Into<String>) -> Self {
        CliError {
            code: Self::IO,
            message: message.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::OracleMismatch(_) => CliError {
                code: Self::INTERNAL,
                message: e.to_string(),
            },
            _ => CliError::invalid(e.to_string()),
        }
    }
}

/// Registry entry.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ProtocolInfo {
    pub name: &'static str,
    pub parameters: &'static str,
    pub anchor: &'static str,
    pub sampling: bool,
}

const PARTIAL: &str = "alpha=0.8 beta=0.6 gamma=0.6 delta=0.8 | alpha2 gamma2";

pub const PROTOCOLS: &[ProtocolInfo] = &[
    ProtocolInfo {
        name: "hbsa",
        parameters: "pol=phi+ spat=phi+",
        anchor: "complete hyperentangled Bell-state analysis",
        sampling: true,
    },
    ProtocolInfo {
        name: "teleport",
        parameters: "pol_theta=1 pol_phi=0.5 path_theta=2 path_phi=1.5",
        anchor: "hyperentanglement teleportation",
        sampling: true,
    },
    ProtocolInfo {
        name: "swap",
        parameters: "",
        anchor: "hyperentanglement swapping",
        sampling: true,
    },
    ProtocolInfo {
        name: "ecp-param-split",
        parameters:
            "alpha=0.8 beta=0.6 gamma=0.6 delta=0.8 | alpha2 gamma2; allow_permutation=true",
        anchor: "parameter-splitting concentration",
        sampling: true,
    },
    ProtocolInfo {
        name: "ecp-schmidt-linear",
        parameters: PARTIAL,
        anchor: "Schmidt projection concentration with linear optics",
        sampling: true,
    },
    ProtocolInfo {
        name: "ecp-qnd-iterative",
        parameters: "alpha=0.8 beta=0.6 gamma=0.6 delta=0.8 | alpha2 gamma2; rounds=3",
        anchor: "iterative concentration with cross-Kerr parity checks",
        sampling: true,
    },
    ProtocolInfo {
        name: "ecp-timebin",
        parameters: "alpha=0.8 beta=0.6 delta=0.6 eta=0.8",
        anchor: "polarization and time-bin concentration",
        sampling: true,
    },
    ProtocolInfo {
        name: "hyper-epp-step1",
        parameters: "F1=0.8 F2=0.8",
        anchor: "purification, first step with polarization-spatial phase checks",
        sampling: true,
    },
    ProtocolInfo {
        name: "hyper-epp-step2",
        parameters: "F1=0.8 F2=0.8",
        anchor: "purification, second step with state joining",
        sampling: true,
    },
    ProtocolInfo {
        name: "hyper-epp",
        parameters: "F1=0.8 F2=0.8 rounds=3",
        anchor: "iterated purification fidelity",
        sampling: false,
    },
    ProtocolInfo {
        name: "hyper-cnot",
        parameters: "index=0..15 | random input drawn from seed",
        anchor: "hyperparallel CNOT gate with dot spins",
        sampling: true,
    },
    ProtocolInfo {
        name: "qd-coefficients",
        parameters: "omega=0 omega_x=0 omega_c=0 g=2 kappa=1 kappa_s=0 gamma=0.1",
        anchor: "dot-cavity reflection and transmission coefficients",
        sampling: false,
    },
    ProtocolInfo {
        name: "ecp-curve",
        parameters: "alpha2 | points=9; rounds=10",
        anchor: "iterative concentration success versus iteration number",
        sampling: false,
    },
    ProtocolInfo {
        name: "epp-curve",
        parameters: "F | points=10; rounds=3",
        anchor: "purification fidelity versus round",
        sampling: false,
    },
    ProtocolInfo {
        name: "epp-efficiency-curve",
        parameters: "F1 F2 | points=10",
        anchor: "purification efficiency with and without recombination",
        sampling: false,
    },
];

pub fn lookup(name: &str) -> Option<&'static ProtocolInfo> {
    PROTOCOLS.iter().find(|p| p.name == name)
}

/// Tab-separated registry table with a header row.
pub fn list_protocols() -> String {
    let mut out = String::from("name\tparameters\tanchor\tsampling\n");
    for p in PROTOCOLS {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\n",
            p.name, p.parameters, p.anchor, p.sampling
        ));
    }
    out
}

/// Typed access to the parameter map; unread keys are rejected.
struct Params<'a> {
    map: &'a BTreeMap<String, Value>,
    read: BTreeSet<&'static str>,
}

impl<'a> Params<'a> {
    fn new(map: &'a BTreeMap<String, Value>) -> Self {
        Params {
            map,
            read: BTreeSet::new(),
        }
    }

    fn has(&mut self, key: &'static str) -> bool {
        self.read.insert(key);
        self.map.contains_key(key)
    }

    fn opt_f64(&mut self, key: &'static str) -> Result<Option<f64>, CliError> {
        self.read.insert(key);
        match self.map.get(key) {
            None => Ok(None),
            Some(Value::Number(n)) => Ok(n.as_f64()),
            Some(Value::String(s)) => s
                .parse()
                .map(Some)
                .map_err(|_| CliError::invalid(format!("{key}: expected a number, got '{s}'"))),
            Some(v) => Err(CliError::invalid(format!(
                "{key}: expected a number, got {v}"
            ))),
        }
    }

    fn f64(&mut self, key: &'static str, default: f64) -> Result<f64, CliError> {
        Ok(self.opt_f64(key)?.unwrap_or(default))
    }

    fn opt_usize(&mut self, key: &'static str) -> Result<Option<usize>, CliError> {
        match self.opt_f64(key)? {
            None => Ok(None),
            Some(x) if x >= 0.0 && x.fract() == 0.0 && x <= 1e9 => Ok(Some(x as usize)),
            Some(x) => Err(CliError::invalid(format!(
                "{key}: expected a non-negative integer, got {x}"
            ))),
        }
    }

    fn usize(&mut self, key: &'static str, default: usize) -> Result<usize, CliError> {
        Ok(self.opt_usize(key)?.unwrap_or(default))
    }

    fn bool(&mut self, key: &'static str, default: bool) -> Result<bool, CliError> {
        self.read.insert(key);
        match self.map.get(key) {
            None => Ok(default),
            Some(Value::Bool(b)) => Ok(*b),
            Some(Value::String(s)) if s == "true" => Ok(true),
            Some(Value::String(s)) if s == "false" => Ok(false),
            Some(v) => Err(CliError::invalid(format!(
                "{key}: expected true or false, got {v}"
            ))),
        }
    }

    fn str(&mut self, key: &'static str, default: &'static str) -> Result<String, CliError> {
        self.read.insert(key);
        match self.map.get(key) {
            None => Ok(default.to_string()),
            Some(Value::String(s)) => Ok(s.clone()),
            Some(v) => Err(CliError::invalid(format!(
                "{key}: expected a string, got {v}"
            ))),
        }
    }

    fn finish(self) -> Result<(), CliError> {
        let unknown: Vec<&String> = self
            .map
            .keys()
            .filter(|k| !self.read.contains(k.as_str()))
            .collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            Err(CliError::invalid(format!(
                "unknown parameter(s): {}",
                unknown
                    .iter()
                    .map(|s| s.as_str())
                    .collect::<Vec<_>>()
                    .join(", ")
            )))
        }
    }
}

fn partial_params(p: &mut Params) -> Result<PartialParams, CliError> {
    if p.has("alpha2") || p.has("gamma2") {
        let a2 = p.f64("alpha2", 0.5)?;
        let g2 = p.f64("gamma2", a2)?;
        return Ok(PartialParams::from_squares(a2, g2)?);
    }
    Ok(PartialParams::new(
        p.f64("alpha", 0.8)?,
        p.f64("beta", 0.6)?,
        p.f64("gamma", 0.6)?,
        p.f64("delta", 0.8)?,
    )?)
}

fn bell(p: &mut Params, key: &'static str) -> Result<Bell, CliError> {
    let s = p.str(key, "phi+")?;
    s.parse()
        .map_err(|_| CliError::invalid(format!("{key}: unknown Bell state '{s}'")))
}

fn qubit(theta: f64, phi: f64) -> [C64; 2] {
    [
        C64::new((theta / 2.0).cos(), 0.0),
        C64::from_polar((theta / 2.0).sin(), phi),
    ]
}

fn cnot_input(p: &mut Params, seed: u64) -> Result<PureState, CliError> {
    let layout = pair_layout("A", "B", PolBasis::Circular)?;
    if let Some(i) = p.opt_usize("index")? {
        if i >= 16 {
            return Err(CliError::invalid(format!("index: expected 0..15, got {i}")));
        }
        let digits = [i >> 3 & 1, i >> 2 & 1, i >> 1 & 1, i & 1];
        return Ok(PureState::basis(layout, &digits)?);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let amps = (0..16)
        .map(|_| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
        .collect();
    Ok(PureState::normalized(layout, amps)?)
}

fn epp_pair(p: &mut Params) -> Result<(f64, f64), CliError> {
    Ok((p.f64("F1", 0.8)?, p.f64("F2", 0.8)?))
}

/// Builds the invocation for a sampleable protocol.
fn invocation(name: &str, p: &mut Params, seed: u64) -> Result<Invocation, CliError> {
    Ok(match name {
        "hbsa" => {
            let label = HyperBell {
                pol: bell(p, "pol")?,
                spatial: bell(p, "spat")?,
            };
            Invocation::hbsa_label(label)
        }
        "teleport" => Invocation::Teleport {
            input: TeleportInput::new(
                qubit(p.f64("pol_theta", 1.0)?, p.f64("pol_phi", 0.5)?),
                qubit(p.f64("path_theta", 2.0)?, p.f64("path_phi", 1.5)?),
            )?,
        },
        "swap" => Invocation::Swap,
        "ecp-param-split" => Invocation::EcpParamSplit {
            params: partial_params(p)?,
            allow_permutation: p.bool("allow_permutation", true)?,
        },
        "ecp-schmidt-linear" => Invocation::EcpSchmidtLinear {
            params: partial_params(p)?,
        },
        "ecp-qnd-iterative" => {
            let params = partial_params(p)?;
            let rounds = p.usize("rounds", 3)?;
            if rounds == 0 {
                return Err(CliError::invalid("rounds: must be at least 1"));
            }
            Invocation::EcpQndIterative { params, rounds }
        }
        "ecp-timebin" => Invocation::EcpTimebin {
            params: TimebinParams::new(
                p.f64("alpha", 0.8)?,
                p.f64("beta", 0.6)?,
                p.f64("delta", 0.6)?,
                p.f64("eta", 0.8)?,
            )?,
        },
        "hyper-epp-step1" => {
            let (f1, f2) = epp_pair(p)?;
            Invocation::epp_step1(f1, f2)?
        }
        "hyper-epp-step2" => {
            let (f1, f2) = epp_pair(p)?;
            Invocation::epp_step2(f1, f2)?
        }
        "hyper-cnot" => Invocation::HyperCnot {
            input: cnot_input(p, seed)?,
        },
        _ => return Err(CliError::unknown(name)),
    })
}

/// Evenly spaced interior grid `lo + (hi - lo) i / (n + 1)`, or the endpoint-
/// inclusive grid when `include_hi` is set.
fn grid(lo: f64, hi: f64, n: usize, include_hi: bool) -> Vec<f64> {
    let d = if include_hi { n } else { n + 1 } as f64;
    (1..=n).map(|i| lo + (hi - lo) * i as f64 / d).collect()
}

fn points(p: &mut Params, default: usize) -> Result<usize, CliError> {
    let n = p.usize("points", default)?;
    if n == 0 {
        return Err(CliError::invalid("points: must be at least 1"));
    }
    Ok(n)
}

/// Builds a table-valued protocol.
fn table(name: &str, p: &mut Params) -> Result<CurveTable, CliError> {
    Ok(match name {
        "hyper-epp" => {
            let (f1, f2) = epp_pair(p)?;
            let rounds = p.usize("rounds", 3)?;
            if rounds == 0 {
                return Err(CliError::invalid("rounds: must be at least 1"));
            }
            let mut t = CurveTable {
                columns: ["round", "F_pol", "F_path", "success_probability"]
                    .map(String::from)
                    .to_vec(),
                rows: Vec::new(),
                metadata: BTreeMap::new(),
            };
            t.rows.push(vec![0.0, f1, f2, 1.0]);
            for r in epp_iterate(f1, f2, rounds)? {
                t.rows
                    .push(vec![r.round as f64, r.f1, r.f2, r.success_probability]);
            }
            t
        }
        "qd-coefficients" => {
            let c = CavityParams {
                omega: p.f64("omega", 0.0)?,
                omega_x: p.f64("omega_x", 0.0)?,
                omega_c: p.f64("omega_c", 0.0)?,
                g: p.f64("g", 2.0)?,
                kappa: p.f64("kappa", 1.0)?,
                kappa_s: p.f64("kappa_s", 0.0)?,
                gamma: p.f64("gamma", 0.1)?,
            };
            let (r, t) = qd_coefficients(&c)?;
            let (r0, t0) = qd_coefficients(&c.uncoupled())?;
            CurveTable {
                columns: ["g", "r_re", "r_im", "t_re", "t_im"]
                    .map(String::from)
                    .to_vec(),
                rows: vec![
                    vec![c.g, r.re, r.im, t.re, t.im],
                    vec![0.0, r0.re, r0.im, t0.re, t0.im],
                ],
                metadata: BTreeMap::new(),
            }
        }
        "ecp-curve" => {
            let g = match p.opt_f64("alpha2")? {
                Some(a) => vec![a],
                None => {
                    let n = points(p, 9)?;
                    grid(0.0, 1.0, n, false)
                }
            };
            curve_ecp_iteration(&g, p.usize("rounds", 10)?)?
        }
        "epp-curve" => {
            let g = match p.opt_f64("F")? {
                Some(f) => vec![f],
                None => {
                    let n = points(p, 10)?;
                    grid(0.5, 1.0, n, true)
                }
            };
            curve_epp_fidelity(&g, p.usize("rounds", 3)?)?
        }
        "epp-efficiency-curve" => {
            let g = match (p.opt_f64("F1")?, p.opt_f64("F2")?) {
                (Some(a), Some(b)) => vec![(a, b)],
                (Some(a), None) | (None, Some(a)) => vec![(a, a)],
                (None, None) => {
                    let n = points(p, 10)?;
                    grid(0.5, 1.0, n, true)
                        .into_iter()
                        .map(|f| (f, f))
                        .collect()
                }
            };
            curve_epp_efficiency(&g)?
        }
        _ => return Err(CliError::unknown(name)),
    })
}

/// Result of a run before rendering.
#[derive(Debug, Clone)]
pub enum RunOutput {
    Report(ProtocolReport),
    Sample(SampleReport),
    Table(CurveTable),
}

/// Validates the configuration and runs it.
pub fn execute(config: &RunConfig) -> Result<(BTreeMap<String, String>, RunOutput), CliError> {
    let info = lookup(&config.protocol).ok_or_else(|| CliError::unknown(&config.protocol))?;
    match (config.mode, config.trials) {
        (Mode::Sample, None) => return Err(CliError::invalid("sample mode requires trials")),
        (Mode::Sample, Some(0)) => return Err(CliError::invalid("trials: must be at least 1")),
        (Mode::Exact, Some(_)) => {
            return Err(CliError::invalid("trials is only valid in sample mode"))
        }
        _ => {}
    }
    if config.mode == Mode::Sample && !info.sampling {
        return Err(CliError::invalid(format!(
            "{} is a deterministic table and has no sample mode",
            info.name
        )));
    }
    let mut meta = BTreeMap::new();
    meta.insert("tool".to_string(), "hypersim".to_string());
    meta.insert("version".to_string(), VERSION.to_string());
    meta.insert("protocol".to_string(), info.name.to_string());
    meta.insert("anchor".to_string(), info.anchor.to_string());
    meta.insert("mode".to_string(), config.mode.to_string());
    meta.insert("seed".to_string(), config.seed.to_string());
    if let Some(t) = config.trials {
        meta.insert("trials".to_string(), t.to_string());
    }
    for (k, v) in &config.parameters {
        let v = match v {
            Value::String(s) => s.clone(),
            v => v.to_string(),
        };
        meta.insert(format!("param.{k}"), v);
    }

    let mut p = Params::new(&config.parameters);
    let out = if info.sampling {
        let inv = invocation(info.name, &mut p, config.seed)?;
        p.finish()?;
        match config.mode {
            Mode::Exact => RunOutput::Report(enumerate(&inv)?),
            Mode::Sample => {
                RunOutput::Sample(sample(&inv, config.trials.unwrap_or(1), config.seed)?)
            }
        }
    } else {
        let t = table(info.name, &mut p)?;
        p.finish()?;
        for (k, v) in &t.metadata {
            meta.insert(k.clone(), v.clone());
        }
        RunOutput::Table(t)
    };
    Ok((meta, out))
}

fn num(x: f64) -> String {
    format!("{x:?}")
}

/// Renders a run deterministically in the requested format.
pub fn render(
    meta: &BTreeMap<String, String>,
    out: &RunOutput,
    format: Format,
) -> Result<String, CliError> {
    match format {
        Format::Json => {
            let body = match out {
                RunOutput::Report(r) => json!({ "metadata": meta, "report": r }),
                RunOutput::Sample(s) => json!({ "metadata": meta, "report": s }),
                RunOutput::Table(t) => json!({ "metadata": meta, "table": t }),
            };
            let mut s = serde_json::to_string_pretty(&body)
                .map_err(|e| CliError::invalid(e.to_string()))?;
            s.push('\n');
            Ok(s)
        }
        Format::Csv => render_csv(meta, out),
    }
}

fn render_csv(meta: &BTreeMap<String, String>, out: &RunOutput) -> Result<String, CliError> {
    let mut head = String::new();
    for (k, v) in meta {
        head.push_str(&format!("# {k}={v}\n"));
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| CliError::io(e.to_string());
    match out {
        RunOutput::Table(t) => {
            w.write_record(&t.columns).map_err(csv_err)?;
            for row in &t.rows {
                w.write_record(row.iter().map(|&x| num(x)))
                    .map_err(csv_err)?;
            }
        }
        RunOutput::Report(r) => {
            for (k, v) in &r.metrics {
                head.push_str(&format!("# metric.{k}={}\n", num(*v)));
            }
            head.push_str(&format!(
                "# success_probability={}\n",
                num(r.success_probability)
            ));
            w.write_record([
                "label",
                "success",
                "probability",
                "fidelity",
                "outcome",
                "corrections",
            ])
            .map_err(csv_err)?;
            for b in &r.branches {
                w.write_record([
                    b.label.clone(),
                    b.success.to_string(),
                    num(b.probability),
                    b.fidelity.map(num).unwrap_or_default(),
                    b.outcome.to_string(),
                    b.corrections.join(";"),
                ])
                .map_err(csv_err)?;
            }
        }
        RunOutput::Sample(s) => {
            head.push_str(&format!("# successes={}\n", s.successes));
            w.write_record(["key", "count", "frequency"])
                .map_err(csv_err)?;
            for (k, &c) in &s.counts {
                w.write_record([k.clone(), c.to_string(), num(c as f64 / s.trials as f64)])
                    .map_err(csv_err)?;
            }
        }
    }
    let body = w.into_inner().map_err(|e| CliError::io(e.to_string()))?;
    head.push_str(&String::from_utf8(body).map_err(|e| CliError::io(e.to_string()))?);
    Ok(head)
}

/// Command-line arguments.
#[derive(Debug, Parser)]
#[command(
    name = "hypersim",
    version,
    about = "Hyperentangled photon protocol simulator"
)]
pub struct Cli {
    /// JSON run configuration; flags override its fields
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Protocol name (see --list)
    #[arg(long)]
    pub protocol: Option<String>,
    /// Protocol parameter, repeatable; values are parsed as JSON when possible
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    /// Monte Carlo trials (sample mode only)
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output file; stdout when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// List registered protocols
    #[arg(long)]
    pub list: bool,
}

fn read_config(path: &FsPath) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))
}

/// Merges the config file with flag overrides.
pub fn resolve(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut c = match &cli.config {
        Some(p) => read_config(p)?,
        None => RunConfig::default(),
    };
    if let Some(p) = &cli.protocol {
        c.protocol = p.clone();
    }
    for kv in &cli.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| CliError::invalid(format!("--set expects KEY=VALUE, got '{kv}'")))?;
        let v = serde_json::from_str(v).unwrap_or_else(|_| Value::String(v.to_string()));
        c.parameters.insert(k.to_string(), v);
    }
    if let Some(m) = cli.mode {
        c.mode = m;
    }
    if cli.trials.is_some() {
        c.trials = cli.trials;
    }
    if let Some(s) = cli.seed {
        c.seed = s;
    }
    if cli.out.is_some() {
        c.out = cli.out.clone();
    }
    if let Some(f) = cli.format {
        c.format = f;
    }
    if c.protocol.is_empty() {
        return Err(CliError::unknown(""));
    }
    Ok(c)
}

/// Runs a configuration and returns the rendered text.
pub fn run(config: &RunConfig) -> Result<String, CliError> {
    let (meta, out) = execute(config)?;
    render(&meta, &out, config.format)
}

/// Entry point: returns the process exit code.
pub fn main_with(cli: Cli) -> u8 {
    let result = if cli.list {
        let text = match cli.format {
            Some(Format::Json) => serde_json::to_string_pretty(PROTOCOLS)
                .map(|s| s + "\n")
                .map_err(|e| CliError::invalid(e.to_string())),
            _ => Ok(list_protocols()),
        };
        text.and_then(|t| emit(&t, cli.out.as_deref()))
    } else {
        resolve(&cli).and_then(|c| run(&c).and_then(|t| emit(&t, c.out.as_deref())))
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.code
        }
    }
}

fn emit(text: &str, out: Option<&FsPath>) -> Result<(), CliError> {
    use std::io::Write;
    match out {
        Some(p) => {
            std::fs::write(p, text).map_err(|e| CliError::io(format!("{}: {e}", p.display())))
        }
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::io(e.to_string())),
    }
}
