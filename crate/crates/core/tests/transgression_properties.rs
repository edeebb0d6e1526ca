mod common;

use std::f64::consts::PI;

use common::*;
use higher_transport::forms::ConnectionPair;
use higher_transport::geometry::{Loop, SmoothingProfile};
use higher_transport::transgression::{loop_holonomy, loop_holonomy_with_profile, transgressed_a, transgressed_phi, LoopTangent};
use higher_transport::transport::IntegratorConfig;
use proptest::prelude::*;

fn su2_connection_3d() -> higher_transport::forms::OneFormField {
    su2_form(&[["x2", "0.5*x3", "0"], ["x3^2", "0.4", "x1"], ["0.3*x1*x2", "cos(x1)", "0.2"]])
}

fn abelian_pair() -> ConnectionPair {
    bu1_pair(3, &[((1, 2), "x3*cos(x1)"), ((1, 3), "1 + x2^2"), ((2, 3), "exp(-x1)")])
}

fn abelian_b(x: &[f64], u: &[f64], v: &[f64]) -> f64 {
    let w = |i: usize, j: usize| u[i] * v[j] - u[j] * v[i];
    x[2] * x[0].cos() * w(0, 1) + (1.0 + x[1] * x[1]) * w(0, 2) + (-x[0]).exp() * w(1, 2)
}

fn tilted_circle(c: [f64; 3], r: f64, tilt: f64) -> Loop {
    let (s, k) = tilt.sin_cos();
    Loop::circle(pt(&c), r, pt(&[k, 0.0, s]), pt(&[0.0, 1.0, 0.0]))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn holonomy_trace_is_invariant_under_rotation(
        c in prop::array::uniform3(0.3f64..0.7),
        r in 0.05f64..0.3,
        tilt in -1.0f64..1.0,
        shift in 0.0f64..1.0,
    ) {
        let a = su2_connection_3d();
        let cfg = IntegratorConfig::default();
        let tau = tilted_circle(c, r, tilt);
        let h0 = loop_holonomy(&a, &tau, &cfg).unwrap();
        let h1 = loop_holonomy(&a, &tau.rotate(shift), &cfg).unwrap();
        let d = (h0.matrix().trace() - h1.matrix().trace()).norm();
        prop_assert!(d <= 1e-6, "{d}");
    }

    #[test]
    fn holonomy_ignores_the_sitting_width(
        c in prop::array::uniform3(0.3f64..0.7),
        r in 0.05f64..0.3,
        tilt in -1.0f64..1.0,
        eps in 0.02f64..0.2,
    ) {
        let a = su2_connection_3d();
        let cfg = IntegratorConfig::default();
        let tau = tilted_circle(c, r, tilt);
        let h0 = loop_holonomy(&a, &tau, &cfg).unwrap();
        let h1 = loop_holonomy_with_profile(&a, &tau, SmoothingProfile::new(eps).unwrap(), &cfg).unwrap();
        prop_assert!(h0.distance(&h1) <= 1e-7, "{}", h0.distance(&h1));
    }

    #[test]
    fn abelian_transgression_is_the_loop_integral(
        c in prop::array::uniform3(0.3f64..0.7),
        r in 0.05f64..0.3,
        tilt in -1.0f64..1.0,
        v in prop::array::uniform3(-1.0f64..1.0),
        wobble in -0.5f64..0.5,
    ) {
        let pair = abelian_pair();
        let tangent = LoopTangent::new(tilted_circle(c, r, tilt), move |z| {
            pt(&[v[0] + wobble * (2.0 * PI * z).sin(), v[1], v[2] * (2.0 * PI * z).cos()])
        });
        let got = transgressed_phi(&pair, &tangent, &IntegratorConfig::default()).unwrap().matrix()[(0, 0)];
        // Periodic trapezoid rule.
        let n = 2000;
        let expect = (0..n)
            .map(|k| {
                let z = k as f64 / n as f64;
                let (x, dz) = tangent.base.jet(z);
                abelian_b(x.as_slice(), tangent.variation(z).as_slice(), dz.as_slice())
            })
            .sum::<f64>()
            / n as f64;
        prop_assert!(got.re.abs() <= 1e-14 && (got.im - expect).abs() <= 1e-8, "{got} vs {expect}");

        let scaled = transgressed_phi(&pair, &tangent.scaled(-1.5), &IntegratorConfig::default()).unwrap();
        prop_assert!((scaled.matrix()[(0, 0)].im + 1.5 * got.im).abs() <= 1e-12);
    }
}

#[test]
fn transgressed_connection_is_the_connection_at_the_base_point() {
    let pair = eg_pair(su2_connection_3d());
    let tau = tilted_circle([0.5, 0.4, 0.6], 0.2, 0.3);
    let base = tau.base_point();
    let tangent = LoopTangent::new(tau, |z| pt(&[1.0 - z, 0.5, z * z]));
    let got = transgressed_a(&pair, &tangent).unwrap();
    let expect = pair.a().eval(base.as_slice(), &[1.0, 0.5, 0.0]);
    assert!(got.distance(&expect) <= 1e-15);
}
