#![allow(dead_code)]

use higher_transport::forms::{ambient_vars, ConnectionPair, Expr, ExprMatrix, MatrixField, OneFormField, TwoFormField};
use higher_transport::geometry::{Path, Point};
use higher_transport::higher_group::{make_aut_inner, make_b_abelian, make_eg, CrossedModule};
use higher_transport::lie_core::{CMat, GroupDescriptor};

pub fn pt(v: &[f64]) -> Point {
    Point::from_row_slice(v)
}

fn parse(src: &str, n: usize) -> Expr {
    let names = ambient_vars(n);
    let vars: Vec<&str> = names.iter().map(String::as_str).collect();
    Expr::parse(src, &vars).expect("fixture expression")
}

/// `Σᵢ cᵢ(x)·image(eᵢ)` for the standard basis `eᵢ` of su(2).
fn su2_combination(coeffs: &[&str; 3], n: usize, image: &dyn Fn(&CMat) -> CMat) -> ExprMatrix {
    let basis = GroupDescriptor::su(2).algebra_basis();
    let rows = image(&basis[0]).nrows();
    let mut m = ExprMatrix::zeros(rows, rows);
    for (e, c) in basis.iter().zip(coeffs) {
        m = m.add(&ExprMatrix::constant_times(&image(e), &parse(c, n)));
    }
    m
}

/// An su(2) 1-form on `ℝⁿ` given by basis coefficients per `dxⁱ`.
pub fn su2_form(coeffs: &[[&str; 3]]) -> OneFormField {
    let n = coeffs.len();
    let comps = coeffs
        .iter()
        .map(|c| MatrixField::symbolic(su2_combination(c, n, &|e| e.clone()), n))
        .collect();
    OneFormField::new(GroupDescriptor::su(2), comps).expect("su(2) fixture")
}

/// Five polynomial / trigonometric su(2) connections on `ℝ²`.
pub fn su2_connections() -> Vec<OneFormField> {
    vec![
        su2_form(&[["x2", "0.5", "x1*x2"], ["x1^2", "cos(x1)", "0"]]),
        su2_form(&[["sin(x1 + x2)", "0", "1"], ["0.3", "x1 - x2", "x2^2"]]),
        su2_form(&[["x1*x2^2", "exp(-x1)", "0.2"], ["-x2", "0.7*x1", "sin(2*x2)"]]),
        su2_form(&[["1.5", "0", "0"], ["0", "1.5", "x1*x2"]]),
        su2_form(&[["cos(pi*x2)", "x1^3", "-x2"], ["x1*x2", "0.4", "sin(x1)*cos(x2)"]]),
    ]
}

pub fn eg_su2() -> CrossedModule {
    make_eg(GroupDescriptor::su(2))
}

pub fn bu1() -> CrossedModule {
    make_b_abelian(GroupDescriptor::u1()).unwrap()
}

pub fn aut_su2() -> CrossedModule {
    make_aut_inner(GroupDescriptor::su(2)).unwrap()
}

pub fn eg_pair(a: OneFormField) -> ConnectionPair {
    ConnectionPair::eg_curvature_pair(&eg_su2(), a).unwrap()
}

/// The `BU(1)` pair `(0, B)` with `B = Σ Bᵢⱼ dxⁱ∧dxʲ` given by `i·bᵢⱼ(x)`.
pub fn bu1_pair(n: usize, entries: &[((usize, usize), &str)]) -> ConnectionPair {
    let b = TwoFormField::from_exprs(
        GroupDescriptor::u1(),
        n,
        &entries
            .iter()
            .map(|(ij, e)| (*ij, vec![vec![format!("i*({e})")]]))
            .collect::<Vec<_>>(),
    )
    .unwrap();
    ConnectionPair::new(&bu1(), OneFormField::zero(GroupDescriptor::trivial(), n), b).unwrap()
}

/// The inner-automorphism pair `(t_*a, K_a)` for an su(2) connection `a`
/// given by basis coefficients.
pub fn aut_pair(coeffs: &[[&str; 3]]) -> ConnectionPair {
    let cm = aut_su2();
    let n = coeffs.len();
    let image = |e: &CMat| cm.t_star_matrix(e);
    let comps = coeffs
        .iter()
        .map(|c| MatrixField::symbolic(su2_combination(c, n, &image), n))
        .collect();
    let a = OneFormField::new(*cm.g(), comps).unwrap();
    let b = TwoFormField::curvature_of(&su2_form(coeffs));
    ConnectionPair::new(&cm, a, b).unwrap()
}

/// A smooth path from `a` to `b` bulging by `bump` in the direction `n`.
pub fn bent_path(a: Point, b: Point, normal: Point, bump: f64) -> Path {
    Path::new(a.len(), move |t| {
        let s = std::f64::consts::PI * t;
        let p = &a + (&b - &a) * t + &normal * (bump * s.sin());
        let v = (&b - &a) + &normal * (bump * std::f64::consts::PI * s.cos());
        (p, v)
    })
}
