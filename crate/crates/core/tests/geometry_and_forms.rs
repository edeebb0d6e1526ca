mod common;

use common::*;
use higher_transport::forms::{
    curvature_two_form, fake_curvature_residual, MatrixField, OneFormField, TwoFormField,
};
use higher_transport::geometry::{bigon_vcompose, standard_bigon, Bigon, BigonJet, SmoothingProfile, SurfaceMap};
use higher_transport::higher_group::make_eg;
use higher_transport::lie_core::GroupDescriptor;
use proptest::prelude::*;

fn affine(x0: [f64; 2], m: [f64; 4]) -> SurfaceMap {
    SurfaceMap::new(2, move |s, t| BigonJet {
        point: pt(&[x0[0] + m[0] * s + m[1] * t, x0[1] + m[2] * s + m[3] * t]),
        ds: pt(&[m[0], m[2]]),
        dt: pt(&[m[1], m[3]]),
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn standard_bigon_is_bilinear_for_affine_charts(
        x0 in prop::array::uniform2(-1.0f64..1.0),
        m in prop::array::uniform4(-2.0f64..2.0),
        s in -1.0f64..1.0,
        t in -1.0f64..1.0,
    ) {
        let g = affine(x0, m);
        let b = standard_bigon(&g, s, t);
        let mid = b.point(0.5, 0.5);
        let expect = g.jet(0.5 * s, 0.5 * t).point;
        prop_assert!((mid - expect).amax() <= 1e-12);
        let corners = [
            (b.point(0.3, 0.0), g.jet(0.0, 0.0).point),
            (b.point(0.7, 1.0), g.jet(s, t).point),
            (b.point(0.0, 0.5), g.jet(0.0, t).point),
            (b.point(1.0, 0.5), g.jet(s, 0.0).point),
        ];
        for (got, want) in corners {
            prop_assert!((got - want).amax() <= 1e-12);
        }
    }

    #[test]
    fn vertical_composite_keeps_outer_boundaries(bump in -0.3f64..0.3, z in 0.0f64..1.0) {
        let profile = SmoothingProfile::default();
        let (x, y) = (pt(&[0.1, 0.2]), pt(&[0.9, 0.4]));
        let n = pt(&[0.0, 1.0]);
        let g0 = bent_path(x.clone(), y.clone(), n.clone(), -0.2);
        let g1 = bent_path(x.clone(), y.clone(), n.clone(), bump);
        let g2 = bent_path(x, y, n, 0.4);
        let s1 = Bigon::straight_homotopy(&g0, &g1, profile).unwrap();
        let s2 = Bigon::straight_homotopy(&g1, &g2, profile).unwrap();
        let c = bigon_vcompose(&s1, &s2).unwrap();
        prop_assert!((c.source().point(z) - s1.source().point(z)).amax() <= 1e-12);
        prop_assert!((c.target().point(z) - s2.target().point(z)).amax() <= 1e-12);
    }

    #[test]
    fn fake_curvature_sampling_is_deterministic(seed in any::<u64>()) {
        let cm = make_eg(GroupDescriptor::su(2));
        let a = su2_connections()[2].clone();
        let b = TwoFormField::curvature_of(&su2_connections()[1]);
        let bounds = [(0.0, 1.0), (0.0, 1.0)];
        let r1 = fake_curvature_residual(&cm, &a, &b, &bounds, 32, seed);
        let r2 = fake_curvature_residual(&cm, &a, &b, &bounds, 32, seed);
        prop_assert_eq!(r1.max_residual.to_bits(), r2.max_residual.to_bits());
        prop_assert_eq!(r1.argmax, r2.argmax);
    }
}

/// The same connection with components wrapped as opaque closures, so that
/// derivatives are taken by central differences of the given step.
fn native_copy(a: &OneFormField, step: f64) -> OneFormField {
    let comps = a
        .components()
        .iter()
        .map(|c| {
            let c = c.clone();
            MatrixField::native(2, move |x| c.eval(x)).with_fd_step(step)
        })
        .collect();
    OneFormField::new(*a.descriptor(), comps).unwrap()
}

#[test]
fn difference_curvature_converges_at_second_order() {
    let x = [0.35, 0.6];
    let (v1, v2) = ([1.0, 0.2], [-0.3, 0.8]);
    for a in su2_connections() {
        let exact = curvature_two_form(&a, &x, &v1, &v2);
        let err = |h: f64| curvature_two_form(&native_copy(&a, h), &x, &v1, &v2).distance(&exact);
        let (e1, e2) = (err(1e-2), err(5e-3));
        if e1 < 1e-11 {
            continue;
        }
        assert!(e1 / e2 >= 3.5, "ratio {}", e1 / e2);
    }
}

#[test]
fn abelian_curvature_is_the_exterior_derivative() {
    let a = OneFormField::from_exprs(
        GroupDescriptor::u1(),
        &[vec![vec!["i*x1*x2^2"]], vec![vec!["i*sin(x1)"]]],
    )
    .unwrap();
    for x in [[0.1, 0.2], [0.5, 0.9], [0.8, 0.3]] {
        let k = curvature_two_form(&a, &x, &[1.0, 0.0], &[0.0, 1.0]).matrix()[(0, 0)];
        let d = x[0].cos() - 2.0 * x[0] * x[1];
        assert!((k.im - d).abs() < 1e-14 && k.re.abs() < 1e-14);
    }
}
