use hypersim::analysis::{curve_ecp_iteration, curve_epp_efficiency, curve_epp_fidelity};
use hypersim::optics::{
    detect, hadamard_pol, hadamard_spatial, local, pockels, ubs_split, DetectSpec, ElementKind,
    ElementOp,
};
use hypersim::protocols::{hyper_bell, product_pair, Bell, HyperBell, PolBasis};
use hypersim::qnd::{
    ps_parity_qnd, ps_qnd, qsjm, xkerr_parity_pol, xkerr_parity_spatial, PhaseClass,
};
use hypersim::state::matrix::{isometry_deviation, projector, unitarity_deviation};
use hypersim::state::{CMatrix, Dof, PureState, SubsystemLabel, SystemLayout, Token};
use num_complex::Complex64 as C64;
use proptest::prelude::*;

const TOL: f64 = 1e-10;

fn amps(n: usize) -> impl Strategy<Value = Vec<C64>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), n)
        .prop_map(|v| {
            v.into_iter()
                .map(|(re, im)| C64::new(re, im))
                .collect::<Vec<_>>()
        })
        .prop_filter("nonzero", |v| {
            v.iter().map(|z| z.norm_sqr()).sum::<f64>() > 1e-3
        })
}

fn unitary(n: usize) -> impl Strategy<Value = CMatrix> {
    amps(n * n).prop_map(move |v| CMatrix::from_vec(n, n, v).qr().q())
}

fn pair(basis: PolBasis) -> SystemLayout {
    hypersim::protocols::pair_layout("A", "B", basis).unwrap()
}

fn state(layout: SystemLayout, v: Vec<C64>) -> PureState {
    PureState::normalized(layout, v).unwrap()
}

fn projected(s: &PureState, keep: impl Fn(usize) -> bool) -> PureState {
    let v = s
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(i, z)| if keep(i) { *z } else { C64::new(0.0, 0.0) })
        .collect();
    state(s.layout().clone(), v)
}

fn total(branches: &[hypersim::state::Branch]) -> f64 {
    branches.iter().map(|b| b.probability).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn unitaries_preserve_norm(v in amps(16), u in unitary(4), pick in 0usize..4) {
        let s = state(pair(PolBasis::Linear), v);
        let out = s.apply_unitary(&[pick, (pick + 1) % 4], &u).unwrap();
        prop_assert!((out.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn projective_measurement_is_complete(v in amps(16), u in unitary(4)) {
        let s = state(pair(PolBasis::Linear), v);
        let projs: Vec<(Token, CMatrix)> = (0..4)
            .map(|k| {
                let col: Vec<C64> = u.column(k).iter().copied().collect();
                (Token::new("M", k.to_string()), projector(&col))
            })
            .collect();
        let b = s.measure_projective(&[0, 2], &projs).unwrap();
        prop_assert!((total(&b) - 1.0).abs() < 1e-9);
        for br in &b {
            prop_assert!((br.state.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn fidelity_is_bounded(v in amps(16), w in amps(16)) {
        let s = state(pair(PolBasis::Linear), v);
        let t = state(pair(PolBasis::Linear), w);
        let f = s.fidelity(&t).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&f));
        prop_assert!((s.fidelity(&s).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn basis_states_measure_deterministically(d in prop::collection::vec(0usize..2, 4)) {
        let s = PureState::basis(pair(PolBasis::Linear), &d).unwrap();
        let b = detect(&s, "A", DetectSpec::PolSpatial).unwrap();
        prop_assert_eq!(b.len(), 1);
        prop_assert!((b[0].probability - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ubs_split_preserves_norm(v in amps(16), r in 0.0..=1.0f64) {
        let s = state(pair(PolBasis::Linear), v);
        let out = ubs_split(&s, "A", r).unwrap();
        prop_assert!((out.norm() - 1.0).abs() < 1e-12);
        let sp = out.find("A", Dof::Spatial).unwrap();
        prop_assert_eq!(out.layout().dim(sp), 3);
    }

    #[test]
    fn pockels_commutes_with_other_carriers(v in amps(8), late in any::<bool>()) {
        let layout = SystemLayout::register(vec![
            SubsystemLabel::polarization("A"),
            SubsystemLabel::timebin("A"),
            SubsystemLabel::polarization("B"),
        ])
        .unwrap();
        let s = state(layout, v);
        for kind in [ElementKind::HadamardPol, ElementKind::SigmaZPol, ElementKind::Rotation { theta: 0.3 }] {
            let x = local(&pockels(&s, "A", late).unwrap(), "B", kind).unwrap();
            let y = pockels(&local(&s, "B", kind).unwrap(), "A", late).unwrap();
            prop_assert!(x.approx_eq_up_to_phase(&y, 1e-12));
            prop_assert!((x.inner(&y).unwrap() - 1.0).norm() < 1e-12);
        }
    }

    #[test]
    fn detection_probabilities_sum_to_one(v in amps(16)) {
        let s = state(pair(PolBasis::Linear), v);
        for spec in [DetectSpec::Polarization, DetectSpec::Spatial, DetectSpec::PolSpatial] {
            let b = detect(&s, "B", spec).unwrap();
            prop_assert!((total(&b) - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn kerr_parity_checks_project(v in amps(16)) {
        let s = state(pair(PolBasis::Linear), v);
        let shifted = PhaseClass::Shifted.token_value();
        for (dof, branches) in [
            (0, xkerr_parity_pol(&s, "A", "B").unwrap()),
            (1, xkerr_parity_spatial(&s, "A", "B").unwrap()),
        ] {
            prop_assert!((total(&branches) - 1.0).abs() < 1e-9);
            for b in branches {
                let even = b.outcome.0[0].value == shifted;
                let digit = |i: usize, q: usize| (i >> (3 - q)) & 1;
                let expect = projected(&s, |i| (digit(i, dof) == digit(i, dof + 2)) == even);
                prop_assert!(b.state.approx_eq_up_to_phase(&expect, 1e-10));
            }
        }
    }

    #[test]
    fn ps_qnd_is_nondestructive(pol in 0usize..4, spatial in 0usize..4) {
        let label = HyperBell { pol: Bell::ALL[pol], spatial: Bell::ALL[spatial] };
        let s = hyper_bell(label, "A", "B", PolBasis::Circular);
        let b = ps_qnd(&s, "A", "B").unwrap();
        prop_assert_eq!(b.len(), 1);
        prop_assert!((b[0].probability - 1.0).abs() < 1e-9);
        prop_assert!((b[0].state.fidelity(&s).unwrap() - 1.0).abs() < 1e-12);
        let plus = |bell| matches!(bell, Bell::PhiPlus | Bell::PsiPlus);
        prop_assert_eq!(b[0].outcome.get("PS-QND[A,B].e1") == Some("+"), plus(label.pol));
        prop_assert_eq!(b[0].outcome.get("PS-QND[A,B].e2") == Some("-"), plus(label.spatial));
    }

    #[test]
    fn qsjm_transfers_polarization(a in amps(2), bp in amps(2), pa in amps(2), pb in amps(2)) {
        let n = (a[0].norm_sqr() + a[1].norm_sqr()).sqrt();
        let a = [a[0] / n, a[1] / n];
        let s = product_pair(
            "A",
            "B",
            PolBasis::Circular,
            [[a[0] * bp[0], a[0] * bp[1]], [a[1] * bp[0], a[1] * bp[1]]],
            [[pa[0] * pb[0], pa[0] * pb[1]], [pa[1] * pb[0], pa[1] * pb[1]]],
        )
        .unwrap();
        let target = PureState::single(SubsystemLabel::circular("B"), &a).unwrap();
        let branches = qsjm(&s, "A", "B").unwrap();
        prop_assert!((branches.iter().map(|q| q.branch.probability).sum::<f64>() - 1.0).abs() < 1e-9);
        for q in branches {
            prop_assert!((q.branch.state.fidelity(&target).unwrap() - 1.0).abs() < TOL);
        }
    }

    #[test]
    fn curve_entries_are_probabilities(f in 0.5..1.0f64, g in 0.0..1.0f64) {
        for t in [
            curve_ecp_iteration(&[g], 3).unwrap(),
            curve_epp_fidelity(&[f], 2).unwrap(),
            curve_epp_efficiency(&[(f, f)]).unwrap(),
        ] {
            for row in &t.rows {
                for (name, x) in t.columns.iter().zip(row) {
                    if name != "round" {
                        prop_assert!((0.0..=1.0 + 1e-12).contains(x), "{name} = {x}");
                    }
                }
            }
        }
    }
}

#[test]
fn elements_are_isometries() {
    use ElementKind::*;
    let kinds = [
        HadamardPol,
        HadamardSpatial,
        SigmaXPol,
        SigmaZPol,
        MinusISigmaYPol,
        SigmaXSpatial,
        SigmaZSpatial,
        MinusISigmaYSpatial,
        SigmaXTime,
        SigmaZTime,
        Rotation { theta: 1.1 },
        PhaseFlip,
        Ubs { r: 0.4 },
        PockelsLate,
        PockelsEarly,
        UnbalancedInterferometer,
    ];
    for k in kinds {
        let op = ElementOp::new(k).unwrap();
        let m = op.matrix();
        let dev = if m.nrows() == m.ncols() {
            unitarity_deviation(m)
        } else {
            isometry_deviation(m)
        };
        assert!(dev < 1e-12, "{k:?}: {dev}");
    }
    assert!(ElementOp::new(Ubs { r: 1.5 }).is_err());
}

#[test]
fn hadamards_permute_bell_states() {
    let image = [
        (Bell::PhiPlus, Bell::PhiPlus),
        (Bell::PhiMinus, Bell::PsiPlus),
        (Bell::PsiPlus, Bell::PhiMinus),
        (Bell::PsiMinus, Bell::PsiMinus),
    ];
    for (from, to) in image {
        for other in Bell::ALL {
            let s = hyper_bell(
                HyperBell {
                    pol: from,
                    spatial: other,
                },
                "A",
                "B",
                PolBasis::Linear,
            );
            let out = hadamard_pol(&hadamard_pol(&s, "A").unwrap(), "B").unwrap();
            let want = hyper_bell(
                HyperBell {
                    pol: to,
                    spatial: other,
                },
                "A",
                "B",
                PolBasis::Linear,
            );
            assert!(out.approx_eq_up_to_phase(&want, 1e-12), "pol {from:?}");
            let s = hyper_bell(
                HyperBell {
                    pol: other,
                    spatial: from,
                },
                "A",
                "B",
                PolBasis::Linear,
            );
            let out = hadamard_spatial(&hadamard_spatial(&s, "A").unwrap(), "B").unwrap();
            let want = hyper_bell(
                HyperBell {
                    pol: other,
                    spatial: to,
                },
                "A",
                "B",
                PolBasis::Linear,
            );
            assert!(out.approx_eq_up_to_phase(&want, 1e-12), "path {from:?}");
        }
    }
}

#[test]
fn ps_parity_qnd_matches_parity_oracle() {
    for idx in 0..16usize {
        let d = [idx >> 3 & 1, idx >> 2 & 1, idx >> 1 & 1, idx & 1];
        let s = PureState::basis(pair(PolBasis::Circular), &d).unwrap();
        let b = ps_parity_qnd(&s, "A", "B").unwrap();
        assert_eq!(b.len(), 1, "input {d:?}");
        let parity = |x: usize, y: usize| if x == y { "even" } else { "odd" };
        assert_eq!(
            b[0].outcome.get("PPQND[A,B].pol"),
            Some(parity(d[0], d[2])),
            "{d:?}"
        );
        assert_eq!(
            b[0].outcome.get("PPQND[A,B].path"),
            Some(parity(d[1], d[3])),
            "{d:?}"
        );
        assert!((b[0].state.fidelity(&s).unwrap() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn product_inputs_split_evenly_in_parity() {
    let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    let s = product_pair(
        "A",
        "B",
        PolBasis::Circular,
        [[h * h, h * h], [h * h, h * h]],
        [[one, zero], [zero, zero]],
    )
    .unwrap();
    let b = ps_parity_qnd(&s, "A", "B").unwrap();
    assert_eq!(b.len(), 2);
    for br in b {
        assert!((br.probability - 0.5).abs() < 1e-12);
    }
}
