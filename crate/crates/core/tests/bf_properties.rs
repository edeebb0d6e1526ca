mod common;

use common::*;
use higher_transport::bf_theory::{bf_action, criticality_check, GridSpec, PairingSpec, DEFAULT_EPSILON};
use higher_transport::forms::{OneFormField, TwoFormField};
use higher_transport::higher_group::make_eg;
use higher_transport::lie_core::GroupDescriptor;
use proptest::prelude::*;

fn u1_form(entries: [&str; 4]) -> OneFormField {
    let rows: Vec<Vec<Vec<String>>> = entries.iter().map(|e| vec![vec![format!("i*({e})")]]).collect();
    OneFormField::from_exprs(GroupDescriptor::u1(), &rows).unwrap()
}

fn u1_two_form(entries: &[((usize, usize), String)]) -> TwoFormField {
    let rows: Vec<_> = entries.iter().map(|(ij, e)| (*ij, vec![vec![format!("i*({e})")]])).collect();
    TwoFormField::from_exprs(GroupDescriptor::u1(), 4, &rows).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn constant_abelian_action_is_the_pfaffian(c in prop::array::uniform6(-1.0f64..1.0)) {
        let cm = make_eg(GroupDescriptor::u1());
        let ij = [(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)];
        let b = u1_two_form(&ij.iter().zip(c).map(|(ij, c)| (*ij, format!("{c}"))).collect::<Vec<_>>());
        let a = OneFormField::zero(GroupDescriptor::u1(), 4);
        let s = bf_action(&cm, &a, &b, &PairingSpec::for_group(cm.g()), &GridSpec::with_n(2)).unwrap();
        let pf = c[0] * c[5] - c[1] * c[4] + c[2] * c[3];
        prop_assert!((s.value - pf).abs() <= 1e-12, "{} vs {pf}", s.value);
    }

    #[test]
    fn abelian_action_scales_quadratically(lambda in -3.0f64..3.0) {
        let cm = make_eg(GroupDescriptor::u1());
        let p = PairingSpec::for_group(cm.g());
        let grid = GridSpec::with_n(6);
        let form = |l: f64| {
            let a = u1_form(["x2*x3", "sin(x4)", "x1", "x2^2"]);
            let b = u1_two_form(&[((1, 2), "x3*x4".into()), ((1, 4), "cos(x2)".into()), ((2, 3), "0.5".into())]);
            let d = GroupDescriptor::u1();
            (
                OneFormField::zero(d, 4).add_scaled(&a, l).unwrap(),
                TwoFormField::zero(d, 4).add_scaled(&b, l).unwrap(),
            )
        };
        let (a1, b1) = form(1.0);
        let (al, bl) = form(lambda);
        let s1 = bf_action(&cm, &a1, &b1, &p, &grid).unwrap().value;
        let sl = bf_action(&cm, &al, &bl, &p, &grid).unwrap().value;
        prop_assert!((sl - lambda * lambda * s1).abs() <= 1e-12 * (1.0 + s1.abs()) * (1.0 + lambda * lambda));
    }
}

fn nonabelian_pair() -> (OneFormField, TwoFormField) {
    let a = su2_form(&[
        ["x2*x3", "0.3", "x4"],
        ["cos(x1)", "x3*x4", "0"],
        ["0.2", "x1", "sin(x2)"],
        ["x1*x2", "0", "0.5*x3"],
    ]);
    let b = TwoFormField::from_exprs(
        GroupDescriptor::su(2),
        4,
        &[
            ((1, 2), vec![vec!["i*x3", "x4"], vec!["-x4", "-i*x3"]]),
            ((2, 4), vec![vec!["0", "exp(-x1)"], vec!["-exp(-x1)", "0"]]),
        ],
    )
    .unwrap();
    (a, b)
}

#[test]
fn refinement_stays_within_the_error_estimate() {
    let cm = eg_su2();
    let (a, b) = nonabelian_pair();
    let ripple = TwoFormField::from_exprs(
        GroupDescriptor::su(2),
        4,
        &[((3, 4), vec![vec!["i*sin(9*x1*x2)", "0"], vec!["0", "-i*sin(9*x1*x2)"]])],
    )
    .unwrap();
    let b = b.add_scaled(&ripple, 1.0).unwrap();
    let p = PairingSpec::for_group(cm.g());
    let coarse = bf_action(&cm, &a, &b, &p, &GridSpec::with_n(12)).unwrap();
    let fine = bf_action(&cm, &a, &b, &p, &GridSpec::with_n(24)).unwrap();
    assert!(coarse.error_estimate > 1e-10, "{coarse:?}");
    let roundoff = 1e-13 * coarse.value.abs();
    assert!((fine.value - coarse.value).abs() <= coarse.error_estimate + roundoff, "{coarse:?} {fine:?}");
}

#[test]
fn criticality_separates_flat_from_non_flat_pairs() {
    let cm = eg_su2();
    let p = PairingSpec::for_group(cm.g());
    let grid = GridSpec::with_n(6);
    let (a, shift) = nonabelian_pair();
    for (k, seed) in [(0usize, 1u64), (1, 2), (2, 3)] {
        let a = OneFormField::zero(*cm.g(), 4).add_scaled(&a, 1.0 + 0.5 * k as f64).unwrap();
        let flat = TwoFormField::curvature_of(&a);
        let r = criticality_check(&cm, &a, &flat, &p, &grid, 4, DEFAULT_EPSILON, seed).unwrap();
        assert!(r.action.abs() <= 1e-9 && r.max_derivative <= 1e-4, "{r:?}");

        let off = flat.add_scaled(&shift, 0.1).unwrap();
        let r = criticality_check(&cm, &a, &off, &p, &grid, 4, DEFAULT_EPSILON, seed).unwrap();
        assert!(r.beta_sup >= 0.1 && r.max_derivative >= 1e-2, "{r:?}");
    }
}
