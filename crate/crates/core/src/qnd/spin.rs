use std::f64::consts::FRAC_1_SQRT_2;
use std::sync::OnceLock;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::optics::{local, ElementKind};
use crate::state::matrix::{c, controlled, diagonal, real, signed_permutation, ONE, ZERO};
use crate::state::{
    BasisTag, Branch, CMatrix, Dof, Outcome, PureState, SubsystemLabel, SystemLayout, Token,
};

/// Spin superposition `(|up> + |down>)/sqrt2`.
pub fn spin_plus() -> [C64; 2] {
    [c(FRAC_1_SQRT_2), c(FRAC_1_SQRT_2)]
}

/// Appends a fresh electron spin named `name`.
pub fn attach_spin(state: &PureState, name: &str, amps: [C64; 2]) -> Result<PureState> {
    state.tensor(&PureState::single(SubsystemLabel::spin(name), &amps)?)
}

fn spin_pos(state: &PureState, spin: &str) -> Result<usize> {
    state.layout().find(spin, Dof::Spin)
}

pub fn spin_hadamard(state: &PureState, spin: &str) -> Result<PureState> {
    let h = real(
        2,
        &[FRAC_1_SQRT_2, FRAC_1_SQRT_2, FRAC_1_SQRT_2, -FRAC_1_SQRT_2],
    );
    Ok(state.apply_trusted(&[spin_pos(state, spin)?], &h))
}

/// Spin phase flip `|up><up| - |down><down|`.
pub fn spin_phase_flip(state: &PureState, spin: &str) -> Result<PureState> {
    Ok(state.apply_trusted(&[spin_pos(state, spin)?], &diagonal(&[ONE, -ONE])))
}

/// Spin readout basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpinBasis {
    /// up / down
    Z,
    /// + / -
    X,
}

/// Destructive spin readout. Tokens carry `up`/`down` or `+`/`-`.
pub fn spin_measure(
    state: &PureState,
    spin: &str,
    basis: SpinBasis,
    device: &str,
) -> Result<Vec<Branch>> {
    let s = c(FRAC_1_SQRT_2);
    let vecs = match basis {
        SpinBasis::Z => vec![
            (Token::new(device, "up"), vec![ONE, ZERO]),
            (Token::new(device, "down"), vec![ZERO, ONE]),
        ],
        SpinBasis::X => vec![
            (Token::new(device, "+"), vec![s, s]),
            (Token::new(device, "-"), vec![s, -s]),
        ],
    };
    state.measure_destructive_trusted(&[spin_pos(state, spin)?], &vecs)
}

fn photon_positions(state: &PureState, photon: &str) -> Result<[usize; 2]> {
    let l = state.layout();
    let pp = l.find(photon, Dof::Polarization)?;
    let sp = l.find(photon, Dof::Spatial)?;
    if l.labels()[pp].basis != BasisTag::Circular {
        return Err(Error::IncompatibleElement {
            element: "QdCavity".into(),
            target: l.labels()[pp].to_string(),
            reason: "dot-cavity units need circular polarization".into(),
        });
    }
    if l.dim(sp) != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: l.dim(sp),
        });
    }
    Ok([pp, sp])
}

/// Ideal dot-cavity scattering on `(pol, port, spin)` with index `4q + 2x + s`.
/// The photon couples when `q ^ x ^ s = 1` and is reflected with its
/// polarization flipped; otherwise it is transmitted to the other port with sign -1.
pub fn scatter_matrix() -> CMatrix {
    signed_permutation(8, |j| {
        let (q, x, s) = (j >> 2, (j >> 1) & 1, j & 1);
        if q ^ x ^ s == 1 {
            (((q ^ 1) << 2) | (x << 1) | s, ONE)
        } else {
            ((q << 2) | ((x ^ 1) << 1) | s, -ONE)
        }
    })
}

/// Photon `photon` scatters off the dot holding spin `spin` (entering through
/// the port given by its path).
pub fn qd_scatter_ideal(state: &PureState, photon: &str, spin: &str) -> Result<PureState> {
    let [pp, sp] = photon_positions(state, photon)?;
    let e = spin_pos(state, spin)?;
    Ok(state.apply_trusted(&[pp, sp, e], &scatter_matrix()))
}

const P: &str = "p";

fn local_layout(spins: &[&str]) -> SystemLayout {
    let mut labels = vec![SubsystemLabel::circular(P), SubsystemLabel::spatial(P)];
    labels.extend(spins.iter().map(|s| SubsystemLabel::spin(s)));
    SystemLayout::register(labels).expect("local layout")
}

/// Builds the matrix of `f` on the local register by pushing every basis state through it.
fn compose(spins: &[&str], f: impl Fn(PureState) -> Result<PureState>) -> CMatrix {
    let layout = local_layout(spins);
    let n = layout.size();
    let mut m = CMatrix::zeros(n, n);
    for j in 0..n {
        let mut amps = vec![ZERO; n];
        amps[j] = ONE;
        let s =
            f(PureState::from_amplitudes(layout.clone(), amps).expect("basis")).expect("compose");
        for (i, a) in s.amplitudes().iter().enumerate() {
            m[(i, j)] = *a;
        }
    }
    m
}

fn on_pol_path(state: &PureState, m: &CMatrix) -> Result<PureState> {
    let [pp, sp] = photon_positions(state, P)?;
    Ok(state.apply_trusted(&[pp, sp], m))
}

/// Circular beam splitter routing: `R` changes port, `L` keeps it.
fn cpbs_route() -> CMatrix {
    signed_permutation(4, |j| {
        let (q, x) = (j >> 1, j & 1);
        ((q << 1) | (x ^ (q ^ 1)), ONE)
    })
}

/// Routing with the roles swapped: `L` changes port, `R` keeps it.
fn cpbs_route_l() -> CMatrix {
    signed_permutation(4, |j| {
        let (q, x) = (j >> 1, j & 1);
        ((q << 1) | (x ^ q), ONE)
    })
}

/// pi phase on port 1.
fn port1_phase() -> CMatrix {
    diagonal(&[-ONE, ONE, -ONE, ONE])
}

/// First stage of the hybrid block: the photon is split by polarization,
/// sandwiched between port phases around the dot, and recombined.
/// Net action `q ^= 1 ^ s ^ x`, `x ^= 1`.
fn pass_stage(state: PureState, spin: &str) -> Result<PureState> {
    let s = on_pol_path(&state, &cpbs_route())?;
    let s = on_pol_path(&s, &port1_phase())?;
    let s = qd_scatter_ideal(&s, P, spin)?;
    let s = on_pol_path(&s, &port1_phase())?;
    on_pol_path(&s, &cpbs_route())
}

/// Second stage: scatter through ports given by the path, then recombine with
/// a wave plate on arm 2, a routing step, a half-wave flip and phase plates.
fn path_stage(state: PureState, spin: &str) -> Result<PureState> {
    let s = qd_scatter_ideal(&state, P, spin)?;
    let [pp, sp] = photon_positions(&s, P)?;
    let x_on_arm2 = controlled(&[CMatrix::identity(2, 2), real(2, &[0.0, 1.0, 1.0, 0.0])]);
    let s = s.apply_trusted(&[sp, pp], &x_on_arm2);
    let s = on_pol_path(&s, &cpbs_route_l())?;
    let s = local(&s, P, ElementKind::SigmaXPol)?;
    // phase plates on both arms: -|R><R| + |L><L|
    on_pol_path(&s, &diagonal(&[-ONE, -ONE, ONE, ONE]))
}

fn block_matrix() -> &'static CMatrix {
    static M: OnceLock<CMatrix> = OnceLock::new();
    M.get_or_init(|| compose(&["e1", "e2"], |s| path_stage(pass_stage(s, "e1")?, "e2")))
}

fn qsjm_pass_matrix() -> &'static CMatrix {
    static M: OnceLock<CMatrix> = OnceLock::new();
    M.get_or_init(|| {
        compose(&["e"], |s| {
            let s = pass_stage(s, "e")?;
            let s = local(&s, P, ElementKind::SigmaXSpatial)?;
            // wave plate on arm 1
            let [pp, sp] = photon_positions(&s, P)?;
            let x_on_arm1 = controlled(&[real(2, &[0.0, 1.0, 1.0, 0.0]), CMatrix::identity(2, 2)]);
            Ok(s.apply_trusted(&[sp, pp], &x_on_arm1))
        })
    })
}

/// Hybrid spin-photon CNOT block on `photon`: `spin1` controls its polarization
/// (`q ^= s1`) and `spin2` its path (`x ^= 1 ^ s2`, phase `(-1)^s2`).
pub fn hybrid_cnot_block(
    state: &PureState,
    photon: &str,
    spin1: &str,
    spin2: &str,
) -> Result<PureState> {
    let [pp, sp] = photon_positions(state, photon)?;
    let e1 = spin_pos(state, spin1)?;
    let e2 = spin_pos(state, spin2)?;
    Ok(state.apply_trusted(&[pp, sp, e1, e2], block_matrix()))
}

/// Single-spin pass used by the joint measurement: `q ^= s`, path unchanged.
pub fn qsjm_pass(state: &PureState, photon: &str, spin: &str) -> Result<PureState> {
    let [pp, sp] = photon_positions(state, photon)?;
    let e = spin_pos(state, spin)?;
    Ok(state.apply_trusted(&[pp, sp, e], qsjm_pass_matrix()))
}

fn sign_of(v: &str) -> &'static str {
    if v == "+" {
        "+"
    } else {
        "-"
    }
}

/// Polarization-spatial phase check on photons `x` and `y`.
///
/// Two fresh spins in `|+>` pick up the relative phases of the polarization and
/// spatial Bell components. Tokens `PS-QND[x,y].e1` and `.e2` are `+` or `-`:
/// `e1 = +` for `phi+`/`psi+` polarization, `e2 = -` for `phi+`/`psi+` paths.
pub fn ps_qnd(state: &PureState, x: &str, y: &str) -> Result<Vec<Branch>> {
    let dev = format!("PS-QND[{x},{y}]");
    let (e1, e2) = (format!("{dev}.e1"), format!("{dev}.e2"));
    let s = attach_spin(state, &e1, spin_plus())?;
    let s = attach_spin(&s, &e2, spin_plus())?;
    let s = hybrid_cnot_block(&s, x, &e1, &e2)?;
    let s = hybrid_cnot_block(&s, y, &e1, &e2)?;
    // e2 is read out in the flipped frame
    let s = spin_phase_flip(&s, &e2)?;
    let mut out = Vec::new();
    for b1 in spin_measure(&s, &e1, SpinBasis::X, &e1)? {
        for b2 in spin_measure(&b1.state, &e2, SpinBasis::X, &e2)? {
            let mut outcome = b1.outcome.clone();
            outcome.extend(&b2.outcome);
            out.push(Branch {
                outcome,
                probability: b1.probability * b2.probability,
                state: b2.state,
            });
        }
    }
    Ok(out)
}

/// Polarization and spatial parity check built from [`ps_qnd`] wrapped in
/// Hadamards on both DOFs of both photons. Tokens `PPQND[x,y].pol` and `.path`
/// read `even` or `odd`.
pub fn ps_parity_qnd(state: &PureState, x: &str, y: &str) -> Result<Vec<Branch>> {
    let mut s = state.clone();
    for p in [x, y] {
        s = crate::optics::hadamard_both(&s, p)?;
    }
    let dev = format!("PS-QND[{x},{y}]");
    let mut out = Vec::new();
    for b in ps_qnd(&s, x, y)? {
        let mut st = b.state;
        for p in [x, y] {
            st = crate::optics::hadamard_both(&st, p)?;
        }
        let e1 = b.outcome.get(&format!("{dev}.e1")).expect("e1 token");
        let e2 = b.outcome.get(&format!("{dev}.e2")).expect("e2 token");
        let pol = if sign_of(e1) == "+" { "even" } else { "odd" };
        let path = if sign_of(e2) == "-" { "even" } else { "odd" };
        out.push(Branch {
            outcome: Outcome(vec![
                Token::new(format!("PPQND[{x},{y}].pol"), pol),
                Token::new(format!("PPQND[{x},{y}].path"), path),
            ]),
            probability: b.probability,
            state: st,
        });
    }
    Ok(out)
}

/// One branch of the joint measurement with the corrections that were applied.
#[derive(Debug, Clone)]
pub struct QsjmBranch {
    pub branch: Branch,
    pub corrections: Vec<String>,
}

/// Moves the polarization state of `a` onto `b` using one dot spin.
///
/// `a`'s polarization is detected in the `R/L` basis and leaves the layout; its
/// path stays behind. Corrections on `b`: `sigma_x` if `a` was `L`, `sigma_z` if
/// the spin was `down`.
pub fn qsjm(state: &PureState, a: &str, b: &str) -> Result<Vec<QsjmBranch>> {
    let dev = format!("QSJM[{a}>{b}]");
    let e = format!("{dev}.spin");
    let s = attach_spin(state, &e, spin_plus())?;
    let s = qsjm_pass(&s, a, &e)?;
    let pa = s.layout().find(a, Dof::Polarization)?;
    let a_dev = format!("{dev}.{a}");
    let a_branches = s.measure_destructive_trusted(
        &[pa],
        &[
            (Token::new(a_dev.clone(), "R"), vec![ONE, ZERO]),
            (Token::new(a_dev.clone(), "L"), vec![ZERO, ONE]),
        ],
    )?;
    let mut out = Vec::new();
    for ab in a_branches {
        let s = spin_hadamard(&ab.state, &e)?;
        let s = qsjm_pass(&s, b, &e)?;
        let s = crate::optics::hadamard_pol(&s, b)?;
        let s = spin_hadamard(&s, &e)?;
        let s = qsjm_pass(&s, b, &e)?;
        let s = spin_hadamard(&s, &e)?;
        for sb in spin_measure(&s, &e, SpinBasis::Z, &e)? {
            let mut st = sb.state;
            let mut corrections = Vec::new();
            if ab.outcome.get(&a_dev) == Some("L") {
                st = local(&st, b, ElementKind::SigmaXPol)?;
                corrections.push(format!("sigma_x({b}.pol)"));
            }
            if sb.outcome.get(&e) == Some("down") {
                st = local(&st, b, ElementKind::SigmaZPol)?;
                corrections.push(format!("sigma_z({b}.pol)"));
            }
            let mut outcome = ab.outcome.clone();
            outcome.extend(&sb.outcome);
            out.push(QsjmBranch {
                branch: Branch {
                    outcome,
                    probability: ab.probability * sb.probability,
                    state: st,
                },
                corrections,
            });
        }
    }
    Ok(out)
}
