//! Differentiation of transport data back to differential forms.
//!
//! A functor `F` on paths is differentiated along short straight segments,
//! a 2-functor along small standard bigons in a coordinate plane. Since
//! `F(0,·) = F(·,0) = 1` for standard bigons, the mixed second difference of
//! the `H`-parts is taken on matrices directly and projected to the algebra.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::forms::{alpha_wedge, GroupField, MatrixField, OneFormField, TwoFormField};
use crate::geometry::{standard_bigon, Bigon, Path, Point, SurfaceMap};
use crate::higher_group::{CrossedModule, TwoMorphismValue};
use crate::lie_core::{AlgebraElement, CMat, GroupDescriptor, GroupElement, C64};
use crate::quadrature::halton_in_box;
use crate::transport::Transformation;

/// Difference step and extrapolation for extraction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FdConfig {
    pub step: f64,
    /// Combine steps `h` and `h/2` to cancel the `O(h²)` term.
    pub richardson: bool,
}

impl Default for FdConfig {
    fn default() -> Self {
        Self {
            step: 1e-3,
            richardson: true,
        }
    }
}

impl FdConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step < 0.1) {
            return Err(Error::domain(format!(
                "difference step must lie in (0, 0.1), got {}",
                self.step
            )));
        }
        Ok(())
    }
}

fn extrapolate(fd: &FdConfig, mut quotient: impl FnMut(f64) -> Result<CMat>) -> Result<CMat> {
    fd.validate()?;
    let d1 = quotient(fd.step)?;
    if !fd.richardson {
        return Ok(d1);
    }
    let d2 = quotient(0.5 * fd.step)?;
    Ok((d2 * C64::new(4.0, 0.0) - d1) * C64::new(1.0 / 3.0, 0.0))
}

fn check_finite(m: &CMat) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::numerical("extraction produced non-finite values"))
    }
}

/// A curve `Γ : ℝ → ℝⁿ` with `Γ(0) = x`, as `t ↦ (Γ(t), Γ'(t))`.
pub type Chart = Arc<dyn Fn(f64) -> (Point, Point) + Send + Sync>;

/// The straight chart `t ↦ x + t·v`.
pub fn straight_chart(x: &[f64], v: &[f64]) -> Chart {
    let x = Point::from_row_slice(x);
    let v = Point::from_row_slice(v);
    Arc::new(move |t| (&x + &v * t, v.clone()))
}

/// The path `τ ↦ Γ(β(τ)·t)` from `Γ(0)` to `Γ(t)`.
fn chart_segment(chart: &Chart, dim: usize, t: f64) -> Path {
    let c = chart.clone();
    let beta = crate::geometry::SmoothingProfile::default();
    Path::new(dim, move |tau| {
        let (b, db) = beta.eval(tau);
        let (p, v) = c(b * t);
        (p, v * (db * t))
    })
}

/// `A_x(v)` from a functor on paths, differentiated along the straight line.
pub fn extract_one_form(
    f: &(dyn Fn(&Path) -> Result<GroupElement> + Sync),
    x: &[f64],
    v: &[f64],
    fd: &FdConfig,
) -> Result<AlgebraElement> {
    extract_one_form_along(f, &straight_chart(x, v), x.len(), fd)
}

/// `A_{Γ(0)}(Γ'(0))` differentiated along an arbitrary chart `Γ`.
pub fn extract_one_form_along(
    f: &(dyn Fn(&Path) -> Result<GroupElement> + Sync),
    chart: &Chart,
    dim: usize,
    fd: &FdConfig,
) -> Result<AlgebraElement> {
    let mut descriptor: Option<GroupDescriptor> = None;
    let d = extrapolate(fd, |h| {
        let (up, um) = rayon::join(
            || f(&chart_segment(chart, dim, h)),
            || f(&chart_segment(chart, dim, -h)),
        );
        let (up, um) = (up?, um?);
        descriptor = Some(*up.descriptor());
        Ok((up.matrix() - um.matrix()) * C64::new(-0.5 / h, 0.0))
    })?;
    check_finite(&d)?;
    Ok(AlgebraElement::projected(descriptor.unwrap(), &d))
}

/// `B_x(v₁, v₂)` from a 2-functor, via standard bigons in the plane
/// `(s, t) ↦ x + s·v₁ + t·v₂`.
pub fn extract_two_form(
    f: &(dyn Fn(&Bigon) -> Result<TwoMorphismValue> + Sync),
    x: &[f64],
    v1: &[f64],
    v2: &[f64],
    fd: &FdConfig,
) -> Result<AlgebraElement> {
    let plane = SurfaceMap::plane(
        Point::from_row_slice(x),
        Point::from_row_slice(v1),
        Point::from_row_slice(v2),
    );
    extract_two_form_along(f, &plane, fd)
}

/// `B_{Γ(0,0)}(∂ₛΓ, ∂ₜΓ)` from standard bigons pushed forward along `Γ`.
pub fn extract_two_form_along(
    f: &(dyn Fn(&Bigon) -> Result<TwoMorphismValue> + Sync),
    chart: &SurfaceMap,
    fd: &FdConfig,
) -> Result<AlgebraElement> {
    let mut descriptor: Option<GroupDescriptor> = None;
    let d = extrapolate(fd, |h| {
        let corners = [(h, h, 1.0), (h, -h, -1.0), (-h, h, -1.0), (-h, -h, 1.0)];
        let values: Vec<Result<TwoMorphismValue>> = {
            use rayon::prelude::*;
            corners
                .par_iter()
                .map(|(s, t, _)| f(&standard_bigon(chart, *s, *t)))
                .collect()
        };
        let mut acc: Option<CMat> = None;
        for (v, (_, _, sign)) in values.into_iter().zip(corners) {
            let v = v?;
            descriptor = Some(*v.h().descriptor());
            let term = v.h().matrix() * C64::new(sign, 0.0);
            acc = Some(match acc {
                Some(a) => a + term,
                None => term,
            });
        }
        Ok(acc.unwrap() * C64::new(-0.25 / (h * h), 0.0))
    })?;
    check_finite(&d)?;
    Ok(AlgebraElement::projected(descriptor.unwrap(), &d))
}

/// `(g(x), φ_x(v))` from a transformation given as its `G`-part on points
/// and its `H`-part `ρ_H` on paths.
pub fn extract_transformation(
    g: &(dyn Fn(&[f64]) -> GroupElement + Sync),
    rho_h: &(dyn Fn(&Path) -> Result<GroupElement> + Sync),
    x: &[f64],
    v: &[f64],
    fd: &FdConfig,
) -> Result<(GroupElement, AlgebraElement)> {
    let inverse = |p: &Path| rho_h(p).map(|h| h.inverse());
    let phi = extract_one_form(&inverse, x, v, fd)?;
    Ok((g(x), phi))
}

fn unit(n: usize, i: usize) -> Vec<f64> {
    let mut e = vec![0.0; n];
    e[i] = 1.0;
    e
}

/// Maximum fake curvature `‖dA + [A∧A] - t_*B‖` of a candidate pair over
/// all coordinate planes at `n_samples` points of `bounds`.
pub fn residual_prop1(
    cm: &CrossedModule,
    a: &OneFormField,
    b: &TwoFormField,
    bounds: &[(f64, f64)],
    n_samples: usize,
    seed: u64,
) -> f64 {
    crate::forms::fake_curvature_residual(cm, a, b, bounds, n_samples, seed).max_residual
}

/// Maximum defects of the two equations relating a transformation to its
/// source and target pairs.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Prop2Residual {
    /// `A' + t_*φ - Ad_g(A) + dg·g⁻¹`
    pub one_form: f64,
    /// `B' + α_*(A'∧φ) + dφ + [φ∧φ] - (α_g)_*B`
    pub two_form: f64,
}

impl Prop2Residual {
    pub fn max(&self) -> f64 {
        self.one_form.max(self.two_form)
    }
}

/// Samples the defining equations of a transformation `(g, φ) : (A, B) → (A', B')`
/// at `n_samples` points of `bounds` and all coordinate directions.
#[allow(clippy::too_many_arguments)]
pub fn residual_prop2(
    cm: &CrossedModule,
    tr: &Transformation,
    source: (&OneFormField, &TwoFormField),
    target: (&OneFormField, &TwoFormField),
    bounds: &[(f64, f64)],
    n_samples: usize,
    seed: u64,
    fd_step: f64,
) -> Result<Prop2Residual> {
    let (a, b) = source;
    let (a2, b2) = target;
    let n = a.ambient_dim();
    let mut out = Prop2Residual::default();
    for x in halton_in_box(bounds, n_samples, seed, 0.0) {
        let g = tr.g.eval_matrix(&x);
        let ginv = cm.g().invert(&g)?;
        for i in 0..n {
            let e = unit(n, i);
            let mc = tr.g.right_maurer_cartan(&x, &e, fd_step)?;
            let lhs = a2.eval_matrix(&x, &e) + cm.t_star_matrix(&tr.phi.eval_matrix(&x, &e));
            let rhs = &g * a.eval_matrix(&x, &e) * &ginv - mc.matrix();
            out.one_form = out.one_form.max((lhs - rhs).norm());
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let (ei, ej) = (unit(n, i), unit(n, j));
                let lhs = b2.component(&x, i, j)
                    + alpha_wedge(cm, a2, &tr.phi, &x, &ei, &ej).matrix()
                    + tr.phi.curvature_component(&x, i, j);
                let rhs = cm.alpha_g_star_matrix(&g, &b.component(&x, i, j));
                out.two_form = out.two_form.max((lhs - rhs).norm());
            }
        }
    }
    Ok(out)
}

/// Maximum defects of the two equations for a modification
/// `a : (g₁, φ₁) ⇛ (g₂, φ₂)`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Prop3Residual {
    /// `g₂ - t(a)·g₁`
    pub zero_form: f64,
    /// `φ₂ + (α_a)_*(A')·a⁻¹ - Ad_a(φ₁) + da·a⁻¹`
    pub one_form: f64,
}

impl Prop3Residual {
    pub fn max(&self) -> f64 {
        self.zero_form.max(self.one_form)
    }
}

/// Samples the defining equations of a modification at `n_samples` points.
#[allow(clippy::too_many_arguments)]
pub fn residual_prop3(
    cm: &CrossedModule,
    a: &GroupField,
    first: &Transformation,
    second: &Transformation,
    a_target: &OneFormField,
    bounds: &[(f64, f64)],
    n_samples: usize,
    seed: u64,
    fd_step: f64,
) -> Result<Prop3Residual> {
    let n = a_target.ambient_dim();
    let mut out = Prop3Residual::default();
    for x in halton_in_box(bounds, n_samples, seed, 0.0) {
        let am = a.eval_matrix(&x);
        let ainv = cm.h().invert(&am)?;
        let g1 = first.g.eval_matrix(&x);
        let g2 = second.g.eval_matrix(&x);
        let d0 = (g2 - cm.t_matrix(&am) * g1).norm();
        out.zero_form = out.zero_form.max(d0);
        for i in 0..n {
            let e = unit(n, i);
            let mc = a.right_maurer_cartan(&x, &e, fd_step)?;
            let lhs = second.phi.eval_matrix(&x, &e)
                + cm.alpha_h_star_matrix(&am, &a_target.eval_matrix(&x, &e)) * &ainv;
            let rhs = &am * first.phi.eval_matrix(&x, &e) * &ainv - mc.matrix();
            out.one_form = out.one_form.max((lhs - rhs).norm());
        }
    }
    Ok(out)
}

/// Composite `(g₂g₁, (α_{g₂})_*∘φ₁ + φ₂)` of two transformations, `first`
/// applied first.
pub fn compose_z2_morphisms(cm: &CrossedModule, first: &Transformation, second: &Transformation) -> Result<Transformation> {
    let n = first.g.ambient_dim();
    let gd = *cm.g();
    let g_field = match (first.g.field().as_expr(), second.g.field().as_expr()) {
        (Some(g1), Some(g2)) => MatrixField::symbolic(g2.matmul(g1), n),
        _ => {
            let (f1, f2) = (first.g.clone(), second.g.clone());
            MatrixField::native(gd.dim(), move |x| f2.eval_matrix(x) * f1.eval_matrix(x))
        }
    };
    let g = GroupField::new(gd, n, g_field)?;
    let components = (0..n)
        .map(|i| {
            let (cm, p1, p2, g2) = (cm.clone(), first.phi.clone(), second.phi.clone(), second.g.clone());
            MatrixField::native(cm.h().dim(), move |x| {
                let e = unit(x.len(), i);
                cm.alpha_g_star_matrix(&g2.eval_matrix(x), &p1.eval_matrix(x, &e)) + p2.eval_matrix(x, &e)
            })
        })
        .collect();
    let phi = OneFormField::new(*cm.h(), components)?;
    Ok(Transformation { g, phi })
}
