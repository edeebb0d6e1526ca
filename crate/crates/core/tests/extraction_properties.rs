mod common;

use common::*;
use higher_transport::extraction::{
    compose_z2_morphisms, extract_one_form, extract_two_form, extract_two_form_along, FdConfig,
};
use higher_transport::forms::{ConnectionPair, GroupField, MatrixField, OneFormField, PairOptions, TwoFormField};
use higher_transport::geometry::{standard_bigon, Bigon, BigonJet, Path, SurfaceMap};
use higher_transport::lie_core::{AlgebraElement, CMat, GroupDescriptor, C64};
use higher_transport::transport::{path_transport, surface_transport, two_functor, IntegratorConfig, Transformation};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

/// Least-squares coefficients of `values ≈ Σₖ cₖ·basis(x)ₖ`.
fn fit(points: &[[f64; 2]], values: &[f64], basis: &dyn Fn(&[f64; 2]) -> Vec<f64>) -> Vec<f64> {
    let rows: Vec<Vec<f64>> = points.iter().map(basis).collect();
    let m = DMatrix::from_fn(rows.len(), rows[0].len(), |i, j| rows[i][j]);
    let y = DVector::from_column_slice(values);
    let c = m.svd(true, true).solve(&y, 1e-14).unwrap();
    c.iter().copied().collect()
}

fn linear(x: &[f64; 2]) -> Vec<f64> {
    vec![1.0, x[0], x[1]]
}

fn quadratic(x: &[f64; 2]) -> Vec<f64> {
    vec![1.0, x[0], x[1], x[0] * x[0], x[0] * x[1], x[1] * x[1]]
}

fn eval_poly(c: &[f64], basis: &dyn Fn(&[f64; 2]) -> Vec<f64>, x: &[f64]) -> f64 {
    basis(&[x[0], x[1]]).iter().zip(c).map(|(b, c)| b * c).sum()
}

/// `Σᵢ pᵢ(x)·eᵢ` for fitted coefficient sets `pᵢ` on the su(2) basis.
fn su2_field(coeffs: Vec<Vec<f64>>, basis: fn(&[f64; 2]) -> Vec<f64>) -> MatrixField {
    let e = GroupDescriptor::su(2).algebra_basis();
    MatrixField::native(2, move |x| {
        let mut m = CMat::zeros(2, 2);
        for (ei, c) in e.iter().zip(&coeffs) {
            m += ei * C64::new(eval_poly(c, &basis, x), 0.0);
        }
        m
    })
}

fn grid(n: usize) -> Vec<[f64; 2]> {
    let h = 0.6 / (n - 1) as f64;
    (0..n)
        .flat_map(|i| (0..n).map(move |j| [0.2 + i as f64 * h, 0.2 + j as f64 * h]))
        .collect()
}

#[test]
fn reconstructed_polynomial_pair_reproduces_surface_transport() {
    let a = su2_form(&[["0.3 + x2", "-0.5*x1", "0.2"], ["x1", "0.4", "0.1 - x2"]]);
    let pair = eg_pair(a);
    let cfg = IntegratorConfig::uniform(64);
    let fd = FdConfig::default();
    let tf = two_functor(&pair, &cfg);
    let path_f = |p: &Path| path_transport(pair.a(), p, &cfg);
    let bigon_f = |b: &Bigon| tf.bigon(b);

    let pts = grid(3);
    let mut a_components = Vec::new();
    for i in 0..2 {
        let mut e = [0.0; 2];
        e[i] = 1.0;
        let samples: Vec<Vec<f64>> = pts
            .iter()
            .map(|x| extract_one_form(&path_f, x, &e, &fd).unwrap().coordinates())
            .collect();
        let coeffs = (0..3)
            .map(|k| fit(&pts, &samples.iter().map(|s| s[k]).collect::<Vec<_>>(), &linear))
            .collect();
        a_components.push(su2_field(coeffs, linear));
    }
    let pts = grid(4);
    let samples: Vec<Vec<f64>> = pts
        .iter()
        .map(|x| extract_two_form(&bigon_f, x, &[1.0, 0.0], &[0.0, 1.0], &fd).unwrap().coordinates())
        .collect();
    let b_coeffs = (0..3)
        .map(|k| fit(&pts, &samples.iter().map(|s| s[k]).collect::<Vec<_>>(), &quadratic))
        .collect();

    let a_fit = OneFormField::new(GroupDescriptor::su(2), a_components).unwrap();
    let b_fit = TwoFormField::new(GroupDescriptor::su(2), 2, vec![su2_field(b_coeffs, quadratic)]).unwrap();
    let opts = PairOptions {
        tolerance: Some(1e-3),
        ..PairOptions::default()
    };
    let rebuilt = ConnectionPair::with_options(pair.crossed_module(), a_fit, b_fit, &opts).unwrap();

    let mut worst = 0.0f64;
    for k in 0..8 {
        let c = k as f64 / 8.0;
        let chart = SurfaceMap::plane(pt(&[0.1 + 0.3 * c, 0.15]), pt(&[0.5, 0.1 * c]), pt(&[-0.1, 0.6 - 0.2 * c]));
        let sigma = standard_bigon(&chart, 1.0, 1.0);
        let k0 = surface_transport(&pair, &sigma, &cfg).unwrap().k;
        let k1 = surface_transport(&rebuilt, &sigma, &cfg).unwrap().k;
        worst = worst.max(k0.distance(&k1));
    }
    assert!(worst <= 1e-3, "{worst}");
}

fn extracted_b(x: &[f64], v1: &[f64], v2: &[f64]) -> AlgebraElement {
    let pair = eg_pair(su2_connections()[2].clone());
    let tf = two_functor(&pair, &IntegratorConfig::default());
    extract_two_form(&|b: &Bigon| tf.bigon(b), x, v1, v2, &FdConfig::default()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4))]

    #[test]
    fn extracted_two_form_is_bilinear_and_antisymmetric(
        x in prop::array::uniform2(0.3f64..0.7),
        v in prop::array::uniform2(-1.0f64..1.0),
        w in prop::array::uniform2(-1.0f64..1.0),
        u in prop::array::uniform2(-1.0f64..1.0),
        c in -2.0f64..2.0,
    ) {
        let b_vw = extracted_b(&x, &v, &w);
        let b_wv = extracted_b(&x, &w, &v);
        prop_assert!(b_vw.add(&b_wv).norm() <= 1e-6, "{}", b_vw.add(&b_wv).norm());
        let sum = [v[0] + c * u[0], v[1] + c * u[1]];
        let lhs = extracted_b(&x, &sum, &w);
        let rhs = b_vw.add(&extracted_b(&x, &u, &w).scale(c));
        prop_assert!(lhs.distance(&rhs) <= 1e-6, "{}", lhs.distance(&rhs));
    }

    #[test]
    fn extracted_two_form_ignores_second_order_chart_terms(
        q in prop::collection::vec(-1.0f64..1.0, 6),
    ) {
        let pair = bu1_pair(2, &[((1, 2), "1 + x1*x2^2 + sin(x1)")]);
        let tf = two_functor(&pair, &IntegratorConfig::default());
        let f = |b: &Bigon| tf.bigon(b);
        let fd = FdConfig::default();
        let (x, v1, v2) = (pt(&[0.4, 0.5]), pt(&[0.8, 0.1]), pt(&[-0.2, 0.7]));
        let plane = SurfaceMap::plane(x.clone(), v1.clone(), v2.clone());
        let (qss, qst, qtt) = (pt(&q[0..2]), pt(&q[2..4]), pt(&q[4..6]));
        let curved = SurfaceMap::new(2, move |s, t| BigonJet {
            point: &x + &v1 * s + &v2 * t + &qss * (s * s) + &qst * (s * t) + &qtt * (t * t),
            ds: &v1 + &qss * (2.0 * s) + &qst * t,
            dt: &v2 + &qst * s + &qtt * (2.0 * t),
        });
        let flat = extract_two_form_along(&f, &plane, &fd).unwrap();
        let bent = extract_two_form_along(&f, &curved, &fd).unwrap();
        prop_assert!(flat.distance(&bent) <= 1e-6, "{}", flat.distance(&bent));
    }
}

fn transformation(g: [[&str; 2]; 2], phi: &[[&str; 3]]) -> Transformation {
    let rows: Vec<Vec<&str>> = g.iter().map(|r| r.to_vec()).collect();
    let g = GroupField::from_exprs(GroupDescriptor::su(2), 2, &rows).unwrap();
    Transformation { g, phi: su2_form(phi) }
}

#[test]
fn composition_of_transformations_is_associative() {
    let cm = eg_su2();
    let t1 = transformation(
        [["cos(x1)", "sin(x1)*exp(i*x2)"], ["-sin(x1)*exp(-i*x2)", "cos(x1)"]],
        &[["x1*x2", "0.2", "0"], ["0.5", "x1", "x2^2"]]);
    let t2 = transformation([["exp(i*x1*x2)", "0"], ["0", "exp(-i*x1*x2)"]], &[["0", "x2", "1"], ["sin(x1)", "0", "-x1"]]);
    let t3 = transformation([["cos(x2)", "i*sin(x2)"], ["i*sin(x2)", "cos(x2)"]], &[["0.3", "x1^2", "x2"], ["0", "cos(x2)", "0.1"]]);
    let left = compose_z2_morphisms(&cm, &compose_z2_morphisms(&cm, &t1, &t2).unwrap(), &t3).unwrap();
    let right = compose_z2_morphisms(&cm, &t1, &compose_z2_morphisms(&cm, &t2, &t3).unwrap()).unwrap();
    for x in grid(4) {
        assert!(left.g.eval(&x).distance(&right.g.eval(&x)) <= 1e-9);
        for e in [[1.0, 0.0], [0.0, 1.0], [0.3, -0.7]] {
            let d = left.phi.eval(&x, &e).distance(&right.phi.eval(&x, &e));
            assert!(d <= 1e-9, "{d}");
        }
    }
}
