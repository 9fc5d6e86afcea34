//! Acceptance suite: one PASS/FAIL line per criterion.

use std::f64::consts::FRAC_1_SQRT_2;
use std::process::Command;
use std::time::Instant;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use hypersim::analysis::{compare_sample, enumerate, sample};
use hypersim::optics::{local, ElementKind};
use hypersim::protocols::{
    case_ensemble, ecp_param_split, ecp_qnd_iterative, ecp_schmidt_linear, ecp_timebin,
    epp_efficiency, epp_iterate, epp_step1, epp_step2, hbsa, hyper_bell, hyper_cnot, mixed_hyper,
    pair_layout, swap, teleport, timebin_table, Bell, HyperBell, Invocation, PartialParams,
    PolBasis, TeleportInput, TimebinParams,
};
use hypersim::qnd::{qd_coefficients, CavityParams};
use hypersim::state::PureState;

const TOL: f64 = 1e-9;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn grid5() -> Vec<(f64, f64)> {
    let g = [0.1, 0.3, 0.5, 0.7, 0.9];
    g.iter()
        .flat_map(|&a| g.iter().map(move |&c| (a, c)))
        .collect()
}

fn c1_hbsa() -> Outcome {
    let t = Instant::now();
    let mut worst: f64 = 0.0;
    for label in HyperBell::all() {
        let r = hbsa(&hyper_bell(label, "A", "B", PolBasis::Linear)).map_err(|e| e.to_string())?;
        let by = r.report.by_label();
        ensure(by.len() == 1, || format!("{label}: {} labels", by.len()))?;
        let p = by.get(&label.to_string()).copied().unwrap_or(0.0);
        worst = worst.max((p - 1.0).abs());
        ensure(r.label == Some(label), || {
            format!("{label}: got {:?}", r.label)
        })?;
    }
    let secs = t.elapsed().as_secs_f64();
    ensure(worst <= TOL, || format!("probability off by {worst:e}"))?;
    ensure(secs < 1.0, || format!("took {secs:.3} s"))?;
    Ok(format!(
        "16/16 labels, max |p-1| {worst:.1e} (tol 1e-9), {secs:.3} s (limit 1 s)"
    ))
}

fn random_qubit(rng: &mut ChaCha8Rng) -> [C64; 2] {
    let v: Vec<C64> = (0..2)
        .map(|_| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
        .collect();
    let n = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
    [v[0] / n, v[1] / n]
}

fn c2_teleport() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut min_f, mut worst_p): (f64, f64) = (1.0, 0.0);
    for _ in 0..100 {
        let input = TeleportInput::new(random_qubit(&mut rng), random_qubit(&mut rng))
            .map_err(|e| e.to_string())?;
        let r = teleport(&input).map_err(|e| e.to_string())?;
        let by = r.by_label();
        ensure(by.len() == 16, || format!("{} analysis outcomes", by.len()))?;
        for p in by.values() {
            worst_p = worst_p.max((p - 1.0 / 16.0).abs());
        }
        for b in &r.branches {
            min_f = min_f.min(b.fidelity.unwrap_or(0.0));
        }
    }
    ensure(worst_p <= TOL && min_f >= 1.0 - TOL, || {
        format!("max |p-1/16| {worst_p:e}, min fidelity {min_f}")
    })?;
    Ok(format!(
        "100 inputs x 16 outcomes, max |p-1/16| {worst_p:.1e}, min fidelity 1-{:.1e} (tol 1e-9)",
        1.0 - min_f
    ))
}

fn c3_swap() -> Outcome {
    let r = swap().map_err(|e| e.to_string())?;
    let labels = r.by_label();
    ensure(labels.len() == 16, || format!("{} outcomes", labels.len()))?;
    let min_f = r.min_success_fidelity().unwrap_or(0.0);
    ensure(min_f >= 1.0 - TOL, || format!("min fidelity {min_f}"))?;
    Ok(format!(
        "16 outcomes, min fidelity 1-{:.1e} (tol 1e-9)",
        1.0 - min_f
    ))
}

fn c4_param_split() -> Outcome {
    let mut worst: f64 = 0.0;
    for (a2, g2) in grid5() {
        let p = PartialParams::from_squares(a2, g2).map_err(|e| e.to_string())?;
        let r = ecp_param_split(&p, true).map_err(|e| e.to_string())?;
        let oracle = 4.0 * a2.min(1.0 - a2) * g2.min(1.0 - g2);
        worst = worst.max((r.success_probability - oracle).abs());
        let f = r.min_success_fidelity().unwrap_or(0.0);
        ensure(f >= 1.0 - TOL, || format!("({a2},{g2}): fidelity {f}"))?;
    }
    let point = PartialParams::new(0.8, 0.6, 0.6, 0.8).map_err(|e| e.to_string())?;
    let p = ecp_param_split(&point, false)
        .map_err(|e| e.to_string())?
        .success_probability;
    ensure(worst <= TOL, || format!("grid deviation {worst:e}"))?;
    ensure((p - 0.5184).abs() <= TOL, || {
        format!("reference point gave {p}")
    })?;
    Ok(format!(
        "25 grid points, max |P-4|bg|^2| {worst:.1e}; (0.8,0.6,0.6,0.8) -> {p:.10} (tol 1e-9)"
    ))
}

fn c5_schmidt() -> Outcome {
    let mut worst: f64 = 0.0;
    for (a2, g2) in grid5() {
        let p = PartialParams::from_squares(a2, g2).map_err(|e| e.to_string())?;
        let r = ecp_schmidt_linear(&p).map_err(|e| e.to_string())?;
        let oracle = 4.0 * a2 * (1.0 - a2) * g2 * (1.0 - g2);
        worst = worst.max((r.success_probability - oracle).abs());
        let f = r.min_success_fidelity().unwrap_or(1.0);
        ensure(f >= 1.0 - TOL, || format!("({a2},{g2}): fidelity {f}"))?;
    }
    let bal = PartialParams::from_squares(0.5, 0.5).map_err(|e| e.to_string())?;
    let p = ecp_schmidt_linear(&bal)
        .map_err(|e| e.to_string())?
        .success_probability;
    ensure(worst <= TOL, || format!("grid deviation {worst:e}"))?;
    ensure((p - 0.25).abs() <= TOL, || format!("balanced gave {p}"))?;
    Ok(format!(
        "25 grid points, max |P-4|abgd|^2| {worst:.1e}; balanced -> {p:.10} (tol 1e-9)"
    ))
}

/// Per-DOF Markov chain: weight `u` of the first Schmidt term; an odd parity
/// (probability `2u(1-u)`) finishes the DOF, an even one maps `u` to
/// `u^2 / (u^2 + (1-u)^2)`. Returns the finished probability after each round.
fn dof_chain(mut u: f64, rounds: usize) -> Vec<f64> {
    let (mut done, mut pending) = (0.0, 1.0);
    let mut out = Vec::new();
    for _ in 0..rounds {
        let odd = 2.0 * u * (1.0 - u);
        done += pending * odd;
        pending *= 1.0 - odd;
        u = u * u / (u * u + (1.0 - u) * (1.0 - u));
        out.push(done);
    }
    out
}

fn c6_iterative() -> Outcome {
    let mut worst: f64 = 0.0;
    for (a2, g2) in [(0.3, 0.6), (0.5, 0.5), (0.8, 0.25)] {
        let p = PartialParams::from_squares(a2, g2).map_err(|e| e.to_string())?;
        let r = ecp_qnd_iterative(&p, 2).map_err(|e| e.to_string())?;
        let (b2, d2) = (1.0 - a2, 1.0 - g2);
        let (sp, ss) = (a2 * a2 + b2 * b2, g2 * g2 + d2 * d2);
        let (up, us) = (a2 * a2 / sp, g2 * g2 / ss);
        let odd = |u: f64| 2.0 * u * (1.0 - u);
        let expected = [
            ("p_round1", odd(a2) * odd(g2)),
            ("p1_case1", sp * ss),
            ("p1_case2", odd(a2) * ss),
            ("p1_case3", sp * odd(g2)),
            ("p2_case1", sp * ss * odd(up) * odd(us)),
            ("p2_case2", odd(a2) * ss * odd(us)),
            ("p2_case3", sp * odd(g2) * odd(up)),
        ];
        for (k, v) in expected {
            let got = r.metrics.get(k).copied().unwrap_or(f64::NAN);
            let d = (got - v).abs();
            ensure(d <= TOL, || format!("({a2},{g2}) {k}: {got} vs {v}"))?;
            worst = worst.max(d);
        }
    }
    let (a2, g2) = (0.7, 0.7);
    let p = PartialParams::from_squares(a2, g2).map_err(|e| e.to_string())?;
    let r = ecp_qnd_iterative(&p, 10).map_err(|e| e.to_string())?;
    let (cp, cs) = (dof_chain(a2, 10), dof_chain(g2, 10));
    let mut prev = 0.0;
    for k in 1..=10 {
        let got = r.metrics[&format!("P_after{k}")];
        let d = (got - cp[k - 1] * cs[k - 1]).abs();
        worst = worst.max(d);
        ensure(d <= TOL, || {
            format!("round {k}: {got} vs {}", cp[k - 1] * cs[k - 1])
        })?;
        ensure(got >= prev - 1e-15, || format!("P decreased at round {k}"))?;
        prev = got;
    }
    Ok(format!(
        "3 points x 7 round/case probabilities + 10-round total, max dev {worst:.1e} (tol 1e-9); P(10) = {prev:.6}, nondecreasing"
    ))
}

fn c7_timebin() -> Outcome {
    let mut worst: f64 = 0.0;
    for (a2, d2) in grid5() {
        let p = TimebinParams::new(a2.sqrt(), (1.0 - a2).sqrt(), d2.sqrt(), (1.0 - d2).sqrt())
            .map_err(|e| e.to_string())?;
        let r = ecp_timebin(&p).map_err(|e| e.to_string())?;
        let oracle = a2 * (1.0 - a2) * d2 * (1.0 - d2);
        worst = worst.max((r.success_probability - oracle).abs());
    }
    ensure(worst <= TOL, || format!("grid deviation {worst:e}"))?;

    // detection -> (pol sign, time sign) of the uncorrected state, and correction
    let table: [(&str, &str, f64, f64, &[ElementKind]); 4] = [
        ("H", "H", 1.0, 1.0, &[]),
        (
            "H",
            "V",
            -1.0,
            -1.0,
            &[ElementKind::SigmaZTime, ElementKind::SigmaZPol],
        ),
        ("V", "H", -1.0, 1.0, &[ElementKind::SigmaZPol]),
        ("V", "V", 1.0, -1.0, &[ElementKind::SigmaZTime]),
    ];
    let h = FRAC_1_SQRT_2;
    let p = TimebinParams::new(0.8, 0.6, 0.6, 0.8).map_err(|e| e.to_string())?;
    let r = ecp_timebin(&p).map_err(|e| e.to_string())?;
    let mut rows_seen = 0;
    for (c, d, sp, st, ops) in table {
        let mut ops_sorted: Vec<_> = ops.to_vec();
        let mut lib: Vec<_> = timebin_table(c, d).to_vec();
        ops_sorted.sort_by_key(|k| format!("{k:?}"));
        lib.sort_by_key(|k| format!("{k:?}"));
        ensure(ops_sorted == lib, || format!("{c}{d}: correction {lib:?}"))?;
        let label = format!("success:{c}{d}");
        let uncorrected = TimebinParams::new(h, sp * h, h, st * h)
            .and_then(|t| t.state("A", "B"))
            .map_err(|e| e.to_string())?;
        for b in r.branches.iter().filter(|b| b.label == label) {
            let f = b.fidelity.unwrap_or(0.0);
            ensure(f >= 1.0 - TOL, || format!("{label}: fidelity {f}"))?;
            if b.outcome.get("C.arrival") == b.outcome.get("D.arrival") {
                let mut s = b.state.clone();
                for &k in ops {
                    s = local(&s, "B", k).map_err(|e| e.to_string())?;
                }
                let f0 = s.fidelity(&uncorrected).map_err(|e| e.to_string())?;
                ensure(f0 >= 1.0 - TOL, || {
                    format!("{label}: uncorrected state fidelity {f0}")
                })?;
                rows_seen += 1;
            }
        }
    }
    ensure(rows_seen >= 4, || format!("only {rows_seen} rows observed"))?;
    Ok(format!(
        "25 grid points, max |P-|abde|^2| {worst:.1e} (tol 1e-9); 4/4 table rows: state, correction, final fidelity 1"
    ))
}

fn c8_epp() -> Outcome {
    let ens = mixed_hyper(0.8, 0.8, "A", "B").map_err(|e| e.to_string())?;
    let r = epp_step1(&ens).map_err(|e| e.to_string())?;
    let p1 = r.metrics["p_case1"];
    let (f1, f2) = (r.metrics["F1_case1"], r.metrics["F2_case1"]);
    ensure((p1 - 0.4624).abs() <= TOL, || {
        format!("case-1 probability {p1}")
    })?;
    let one = 0.64 / (0.64 + 0.04);
    ensure((f1 - one).abs() <= TOL && (f2 - one).abs() <= TOL, || {
        format!("one-round fidelities {f1}, {f2}")
    })?;
    let rounds = epp_iterate(0.8, 0.8, 3).map_err(|e| e.to_string())?;
    let f3 = rounds[2].f1.min(rounds[2].f2);
    ensure(f3 > 0.9999, || format!("three-round fidelity {f3}"))?;
    ensure(
        rounds
            .windows(2)
            .all(|w| w[1].f1 > w[0].f1 && w[1].f2 > w[0].f2),
        || "fidelity not increasing".into(),
    )?;
    let (y0, y) = epp_efficiency(0.8, 0.8).map_err(|e| e.to_string())?;
    ensure(
        (y0 - 0.4624).abs() <= TOL && (y - 0.68).abs() <= TOL && y >= y0,
        || format!("Y0 {y0}, Y {y}"),
    )?;
    let c3 = case_ensemble(&r, "case3").map_err(|e| e.to_string())?;
    let c4 = case_ensemble(&r, "case4").map_err(|e| e.to_string())?;
    let s2 = epp_step2(&c3, &c4).map_err(|e| e.to_string())?;
    let (g1, g2) = (s2.metrics["F1"], s2.metrics["F2"]);
    ensure((g1 - f1).abs() <= TOL && (g2 - f2).abs() <= TOL, || {
        format!("recombined fidelities {g1}, {g2} vs {f1}, {f2}")
    })?;
    Ok(format!(
        "p1 {p1:.10}, F' {f1:.10} (16/17), F'''(3) {f3:.8}, Y0 {y0:.10}, Y {y:.10}, recombined F {g1:.10}/{g2:.10} (tol 1e-9)"
    ))
}

fn cnot_index(d: [usize; 4]) -> usize {
    d[0] << 3 | d[1] << 2 | d[2] << 1 | d[3]
}

fn c9_cnot() -> Outcome {
    let layout = pair_layout("A", "B", PolBasis::Circular).map_err(|e| e.to_string())?;
    // columns[record][input] = output amplitudes
    let mut ops: std::collections::BTreeMap<String, Vec<Vec<C64>>> = Default::default();
    for k in 0..16 {
        let d = [k >> 3 & 1, k >> 2 & 1, k >> 1 & 1, k & 1];
        let s = PureState::basis(layout.clone(), &d).map_err(|e| e.to_string())?;
        let r = hyper_cnot(&s).map_err(|e| e.to_string())?;
        ensure(r.branches.len() == 4, || {
            format!("input {k}: {} branches", r.branches.len())
        })?;
        for b in &r.branches {
            ensure(b.state.layout() == &layout, || {
                "spins left in output".into()
            })?;
            ops.entry(b.outcome.to_string())
                .or_insert_with(|| vec![Vec::new(); 16])[k] = b.state.amplitudes().to_vec();
        }
    }
    ensure(ops.len() == 4, || format!("{} spin outcomes", ops.len()))?;
    let mut worst: f64 = 0.0;
    for cols in ops.values() {
        // A controls B in both DOFs: (pA, sA, pB, sB) -> (pA, sA, pB^pA, sB^sA)
        let target = |k: usize| {
            let d = [k >> 3 & 1, k >> 2 & 1, k >> 1 & 1, k & 1];
            cnot_index([d[0], d[1], d[2] ^ d[0], d[3] ^ d[1]])
        };
        let phase = cols[0][target(0)] / cols[0][target(0)].norm();
        for (k, col) in cols.iter().enumerate() {
            for (i, a) in col.iter().enumerate() {
                let want = if i == target(k) {
                    phase
                } else {
                    C64::new(0.0, 0.0)
                };
                worst = worst.max((a - want).norm());
            }
        }
    }
    ensure(worst < TOL, || format!("operator deviation {worst:e}"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut min_f: f64 = 1.0;
    for _ in 0..20 {
        let amps = (0..16)
            .map(|_| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
            .collect();
        let s = PureState::normalized(layout.clone(), amps).map_err(|e| e.to_string())?;
        let r = hyper_cnot(&s).map_err(|e| e.to_string())?;
        min_f = min_f.min(r.min_success_fidelity().unwrap_or(0.0));
    }
    ensure(min_f >= 1.0 - TOL, || {
        format!("random input fidelity {min_f}")
    })?;
    Ok(format!(
        "4 spin branches, max |U - e^(i phi) CNOT(x)CNOT| {worst:.1e}; 20 random inputs, min fidelity 1-{:.1e} (tol 1e-9)",
        1.0 - min_f
    ))
}

fn c10_cavity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let p = CavityParams {
            omega: rng.gen_range(-2.0..2.0),
            omega_x: rng.gen_range(-2.0..2.0),
            omega_c: rng.gen_range(-2.0..2.0),
            g: rng.gen_range(0.0..5.0),
            kappa: rng.gen_range(0.1..3.0),
            kappa_s: rng.gen_range(0.0..1.0),
            gamma: rng.gen_range(0.0..1.0),
        };
        let (r, t) = qd_coefficients(&p).map_err(|e| e.to_string())?;
        worst = worst.max((r - (1.0 + t)).norm());
    }
    ensure(worst <= 1e-12, || format!("r - (1+t) reached {worst:e}"))?;
    let (r0, t0) =
        qd_coefficients(&CavityParams::resonant(0.0, 1.0, 0.1)).map_err(|e| e.to_string())?;
    ensure(r0.norm() <= 1e-12 && (t0 + 1.0).norm() <= 1e-12, || {
        format!("g = 0 gave r {r0}, t {t0}")
    })?;
    let (_, t) =
        qd_coefficients(&CavityParams::resonant(2.0, 1.0, 0.1)).map_err(|e| e.to_string())?;
    ensure(
        (t.re + 0.0123456790).abs() <= TOL && t.im.abs() <= TOL,
        || format!("strong coupling t {t}"),
    )?;
    Ok(format!(
        "1000 draws, max |r-(1+t)| {worst:.1e} (tol 1e-12); g=0 -> r 0, t -1; g=2k, gamma=0.1k -> t {:.10}",
        t.re
    ))
}

fn mc_invocations() -> Result<Vec<Invocation>, String> {
    let e = |x: hypersim::Error| x.to_string();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let layout = pair_layout("A", "B", PolBasis::Circular).map_err(e)?;
    let amps = (0..16)
        .map(|_| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
        .collect();
    Ok(vec![
        Invocation::Hbsa {
            state: hyper_bell(
                HyperBell {
                    pol: Bell::PsiMinus,
                    spatial: Bell::PhiPlus,
                },
                "A",
                "B",
                PolBasis::Linear,
            ),
        },
        Invocation::Teleport {
            input: TeleportInput::new(random_qubit(&mut rng), random_qubit(&mut rng)).map_err(e)?,
        },
        Invocation::Swap,
        Invocation::EcpParamSplit {
            params: PartialParams::new(0.8, 0.6, 0.6, 0.8).map_err(e)?,
            allow_permutation: false,
        },
        Invocation::EcpSchmidtLinear {
            params: PartialParams::from_squares(0.3, 0.6).map_err(e)?,
        },
        Invocation::EcpQndIterative {
            params: PartialParams::from_squares(0.3, 0.6).map_err(e)?,
            rounds: 3,
        },
        Invocation::EcpTimebin {
            params: TimebinParams::new(0.8, 0.6, 0.6, 0.8).map_err(e)?,
        },
        Invocation::epp_step1(0.8, 0.7).map_err(e)?,
        Invocation::epp_step2(0.8, 0.7).map_err(e)?,
        Invocation::HyperCnot {
            input: PureState::normalized(layout, amps).map_err(e)?,
        },
    ])
}

fn run_cli(args: &[&str]) -> Result<(i32, Vec<u8>), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_hypersim"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    Ok((out.status.code().unwrap_or(-1), out.stdout))
}

fn c11_statistics() -> Outcome {
    const TRIALS: u64 = 100_000;
    let mut keys = 0;
    let mut worst_sigma: f64 = 0.0;
    for inv in mc_invocations()? {
        let exact = enumerate(&inv).map_err(|e| e.to_string())?;
        let s = sample(&inv, TRIALS, 2024).map_err(|e| e.to_string())?;
        for a in compare_sample(&exact, &s) {
            keys += 1;
            if a.bound > 0.0 {
                worst_sigma =
                    worst_sigma.max((a.frequency - a.probability).abs() / (a.bound / 4.0));
            }
            ensure(a.ok, || {
                format!(
                    "{} {}: frequency {} vs p {} (bound {})",
                    inv.name(),
                    a.key,
                    a.frequency,
                    a.probability,
                    a.bound
                )
            })?;
        }
    }
    let args = [
        "--protocol",
        "ecp-qnd-iterative",
        "--mode",
        "sample",
        "--trials",
        "2000",
        "--seed",
        "7",
        "--format",
        "csv",
    ];
    let (c1, o1) = run_cli(&args)?;
    let (c2, o2) = run_cli(&args)?;
    ensure(c1 == 0 && c2 == 0 && !o1.is_empty() && o1 == o2, || {
        format!("sample CLI runs differ (exit {c1}, {c2})")
    })?;
    let json = ["--protocol", "hyper-epp-step1", "--format", "json"];
    let (c3, o3) = run_cli(&json)?;
    let (c4, o4) = run_cli(&json)?;
    ensure(c3 == 0 && c4 == 0 && o3 == o4, || {
        "exact JSON runs differ".into()
    })?;
    Ok(format!(
        "10 protocols x 1e5 trials, {keys} outcome keys within 4 sigma (worst {worst_sigma:.2} sigma); CLI output byte-identical for equal seeds"
    ))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("hyperentangled Bell-state analysis completeness", c1_hbsa),
        ("teleportation", c2_teleport),
        ("entanglement swapping", c3_swap),
        ("parameter-splitting concentration", c4_param_split),
        ("linear Schmidt-projection concentration", c5_schmidt),
        ("iterative cross-Kerr concentration", c6_iterative),
        ("time-bin concentration", c7_timebin),
        ("purification", c8_epp),
        ("hyperparallel CNOT", c9_cnot),
        ("dot-cavity coefficients", c10_cavity),
        ("Monte Carlo agreement and CLI determinism", c11_statistics),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let r = f();
        let secs = t.elapsed().as_secs_f64();
        match r {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} [{secs:.2} s]", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why} [{secs:.2} s]", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
