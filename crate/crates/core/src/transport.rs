//! Parallel transport along paths and surface transport along bigons.
//!
//! Path transport solves `u' = -A(γ'(t))·u`, `u(0) = 1`, so that
//! `F(γ₂ ∘ γ₁) = F(γ₂)·F(γ₁)`. Surface transport integrates the
//! `𝔥`-valued driver
//!
//! ```text
//! 𝒜(s) = -∫₀¹ (α_{F(γ_{s,t})⁻¹})_* B(∂ₛΣ, ∂ₜΣ) dt,    γ_{s,t}(τ) = Σ(s, τt)
//! ```
//!
//! with the same right-invariant equation in `H`, and sets
//! `k(Σ) = α(F(γ₀), f(1)⁻¹)`.
//!
//! All equations are integrated with classical fourth order Runge-Kutta;
//! fibre integrals use composite Simpson on the RK nodes of a single sweep.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::forms::{curvature_two_form, pairs, ConnectionPair, GroupField, MatrixField, OneFormField, TwoFormField};
use crate::geometry::{Bigon, BigonJet, Path};
use crate::higher_group::{CrossedModule, TwoMorphismValue};
use crate::lie_core::{CMat, GroupDescriptor, GroupElement, C64};
use crate::quadrature::simpson_weights;

/// Target matching residuals above this abort with
/// [`Error::TargetMatching`].
pub const TARGET_MATCHING_HARD_LIMIT: f64 = 1e-3;

/// Step counts for the integrators.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegratorConfig {
    pub n_steps_path: usize,
    pub n_steps_surface_s: usize,
    /// Intervals of the inner sweep and Simpson rule; must be even.
    pub n_quad_t: usize,
    /// Project back onto the group after every step.
    pub retraction: bool,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            n_steps_path: 256,
            n_steps_surface_s: 128,
            n_quad_t: 128,
            retraction: true,
        }
    }
}

impl IntegratorConfig {
    /// Uses `n` for every step count, rounding the quadrature up to even.
    pub fn uniform(n: usize) -> Self {
        Self {
            n_steps_path: n,
            n_steps_surface_s: n,
            n_quad_t: n + n % 2,
            retraction: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_steps_path == 0 || self.n_steps_surface_s == 0 {
            return Err(Error::domain("step counts must be positive"));
        }
        if self.n_quad_t == 0 || self.n_quad_t % 2 != 0 {
            return Err(Error::domain("n_quad_t must be even and positive"));
        }
        Ok(())
    }
}

fn finite(m: &CMat) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

fn scaled(m: &CMat, c: f64) -> CMat {
    m * C64::new(c, 0.0)
}

/// One RK4 step of `u' = -a(t)·u` given `a` at the start, midpoint and end.
pub(crate) fn rk4_left_step(u: &CMat, a0: &CMat, am: &CMat, a1: &CMat, h: f64) -> CMat {
    let k1 = -(a0 * u);
    let k2 = -(am * (u + scaled(&k1, 0.5 * h)));
    let k3 = -(am * (u + scaled(&k2, 0.5 * h)));
    let k4 = -(a1 * (u + scaled(&k3, h)));
    u + scaled(&(k1 + scaled(&k2, 2.0) + scaled(&k3, 2.0) + k4), h / 6.0)
}

/// One RK4 step of `w' = -w·a(t)`.
fn rk4_right_step(w: &CMat, a0: &CMat, am: &CMat, a1: &CMat, h: f64) -> CMat {
    let k1 = -(w * a0);
    let k2 = -((w + scaled(&k1, 0.5 * h)) * am);
    let k3 = -((w + scaled(&k2, 0.5 * h)) * am);
    let k4 = -((w + scaled(&k3, h)) * a1);
    w + scaled(&(k1 + scaled(&k2, 2.0) + scaled(&k3, 2.0) + k4), h / 6.0)
}

/// One RK4 step of a general matrix equation `u' = f(t, u)`.
pub(crate) fn rk4_step(u: &CMat, t: f64, h: f64, f: &mut impl FnMut(f64, &CMat) -> CMat) -> CMat {
    let k1 = f(t, u);
    let k2 = f(t + 0.5 * h, &(u + scaled(&k1, 0.5 * h)));
    let k3 = f(t + 0.5 * h, &(u + scaled(&k2, 0.5 * h)));
    let k4 = f(t + h, &(u + scaled(&k3, h)));
    u + scaled(&(k1 + scaled(&k2, 2.0) + scaled(&k3, 2.0) + k4), h / 6.0)
}

fn retract_if(d: &GroupDescriptor, m: CMat, on: bool) -> CMat {
    if on {
        d.retract(&m)
    } else {
        m
    }
}

/// Nudges an interior step boundary into the step, so that a velocity jump
/// of a composite path at that boundary is seen from the correct side.
fn one_sided(t: f64, dir: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 {
        t
    } else {
        t + dir * ONE_SIDED_OFFSET
    }
}

const ONE_SIDED_OFFSET: f64 = 1e-13;

/// Solves `u' = -a(t)·u` on `[0, 1]` with `n` steps, where `a` is sampled
/// at the `2n + 1` points `k/(2n)`.
pub(crate) fn integrate_left(
    d: &GroupDescriptor,
    samples: &[CMat],
    retraction: bool,
) -> Result<CMat> {
    let n = (samples.len() - 1) / 2;
    let h = 1.0 / n as f64;
    let mut u = d.identity_matrix();
    for k in 0..n {
        u = rk4_left_step(&u, &samples[2 * k], &samples[2 * k + 1], &samples[2 * k + 2], h);
        u = retract_if(d, u, retraction);
    }
    if !finite(&u) {
        return Err(Error::numerical("transport produced non-finite values"));
    }
    Ok(u)
}

fn finish(d: &GroupDescriptor, u: CMat, retraction: bool) -> Result<GroupElement> {
    if !finite(&u) {
        return Err(Error::numerical("transport produced non-finite values"));
    }
    if retraction {
        let r = d.group_residual(&u);
        if r > 10.0 * d.tolerance() {
            return Err(Error::numerical(format!(
                "transport left {} (residual {r:.3e})",
                d.name()
            )));
        }
    }
    Ok(GroupElement::trusted(*d, u))
}

fn check_dim(expected: usize, got: usize, what: &str) -> Result<()> {
    if expected != got {
        return Err(Error::domain(format!(
            "{what} lives in R^{got} but the forms are defined on R^{expected}"
        )));
    }
    Ok(())
}

/// `F_A(γ)` with `n` RK4 steps.
pub fn path_transport_steps(a: &OneFormField, path: &Path, n: usize, retraction: bool) -> Result<GroupElement> {
    check_dim(a.ambient_dim(), path.dim(), "path")?;
    if n == 0 {
        return Err(Error::domain("step count must be positive"));
    }
    let d = a.descriptor();
    let h = 1.0 / n as f64;
    let at = |t: f64| {
        let (x, v) = path.jet(t);
        a.eval_matrix(x.as_slice(), v.as_slice())
    };
    let mut u = d.identity_matrix();
    for k in 0..n {
        let (t0, t1) = (k as f64 * h, (k + 1) as f64 * h);
        let a0 = at(one_sided(t0, 1.0));
        let am = at(t0 + 0.5 * h);
        let a1 = at(one_sided(t1, -1.0));
        u = retract_if(d, rk4_left_step(&u, &a0, &am, &a1, h), retraction);
    }
    finish(d, u, retraction)
}

/// `F_A(γ)` at `cfg.n_steps_path` steps.
pub fn path_transport(a: &OneFormField, path: &Path, cfg: &IntegratorConfig) -> Result<GroupElement> {
    cfg.validate()?;
    path_transport_steps(a, path, cfg.n_steps_path, cfg.retraction)
}

/// What one sweep in `t` at fixed `s` produces.
struct Sweep {
    /// `𝒜(s)`
    driver: CMat,
    /// `F_A(Σ(s, ·))`
    transport: CMat,
}

fn sweep(pair: &ConnectionPair, bigon: &Bigon, s: f64, cfg: &IntegratorConfig, weights: &[f64]) -> Result<Sweep> {
    let cm = pair.crossed_module();
    let (a, b) = (pair.a(), pair.b());
    let gd = cm.g();
    let n = cfg.n_quad_t;
    let h = 1.0 / n as f64;
    let hd = cm.h().dim();
    let conn = |j: &BigonJet| a.eval_matrix(j.point.as_slice(), j.dt.as_slice());

    let mut u = gd.identity_matrix();
    let mut acc = CMat::zeros(hd, hd);
    let mut jet = bigon.jet(s, 0.0);
    let a_first = conn(&jet);
    for k in 0..=n {
        let area = b.eval_matrix(jet.point.as_slice(), jet.ds.as_slice(), jet.dt.as_slice());
        if area.iter().any(|z| z.re != 0.0 || z.im != 0.0) {
            let uinv = gd.invert(&u)?;
            acc += scaled(&cm.alpha_g_star_matrix(&uinv, &area), weights[k]);
        }
        if k == n {
            break;
        }
        let (t0, t1) = (k as f64 * h, (k + 1) as f64 * h);
        let a_start = if k == 0 { a_first.clone() } else { conn(&bigon.jet(s, one_sided(t0, 1.0))) };
        let a_mid = conn(&bigon.jet(s, t0 + 0.5 * h));
        let a_end = conn(&bigon.jet(s, one_sided(t1, -1.0)));
        u = retract_if(gd, rk4_left_step(&u, &a_start, &a_mid, &a_end, h), cfg.retraction);
        jet = bigon.jet(s, t1);
    }
    if !finite(&u) || !finite(&acc) {
        return Err(Error::numerical("surface sweep produced non-finite values"));
    }
    Ok(Sweep {
        driver: -acc,
        transport: u,
    })
}

/// The driver `𝒜_Σ(s)` in the Lie algebra of `H`.
pub fn surface_driver(pair: &ConnectionPair, bigon: &Bigon, s: f64, cfg: &IntegratorConfig) -> Result<CMat> {
    cfg.validate()?;
    check_dim(pair.ambient_dim(), bigon.dim(), "bigon")?;
    let w = simpson_weights(cfg.n_quad_t)?;
    Ok(sweep(pair, bigon, s, cfg, &w)?.driver)
}

/// Output of [`surface_transport`].
#[derive(Clone, Debug)]
pub struct SurfaceTransportResult {
    pub k: GroupElement,
    /// `F(γ₀)`
    pub g_source: GroupElement,
    /// `F(γ₁)`, integrated independently of `k`.
    pub g_target: GroupElement,
    /// `‖t(k)·F(γ₀) - F(γ₁)‖ / max(1, ‖F(γ₁)‖)`
    pub matching_residual: f64,
}

impl SurfaceTransportResult {
    /// The 2-morphism `k : F(γ₀) ⇒ F(γ₁)`.
    pub fn value(&self) -> TwoMorphismValue {
        TwoMorphismValue::from_parts(self.g_source.clone(), self.k.clone(), self.g_target.clone())
    }
}

/// Surface transport `k_{A,B}(Σ)`.
pub fn surface_transport(pair: &ConnectionPair, bigon: &Bigon, cfg: &IntegratorConfig) -> Result<SurfaceTransportResult> {
    cfg.validate()?;
    check_dim(pair.ambient_dim(), bigon.dim(), "bigon")?;
    let cm = pair.crossed_module();
    let w = simpson_weights(cfg.n_quad_t)?;
    let n = cfg.n_steps_surface_s;
    let sweeps: Vec<Sweep> = (0..=2 * n)
        .into_par_iter()
        .map(|k| sweep(pair, bigon, k as f64 / (2 * n) as f64, cfg, &w))
        .collect::<Result<_>>()?;
    let drivers: Vec<CMat> = sweeps.iter().map(|s| s.driver.clone()).collect();
    let f = integrate_left(cm.h(), &drivers, cfg.retraction)?;
    let finv = cm.h().invert(&f)?;
    let g0 = &sweeps[0].transport;
    let g1 = &sweeps[2 * n].transport;
    let k = retract_if(cm.h(), cm.alpha_matrix(g0, &finv), cfg.retraction);
    let value = TwoMorphismValue::from_parts(
        GroupElement::trusted(*cm.g(), g0.clone()),
        GroupElement::trusted(*cm.h(), k),
        GroupElement::trusted(*cm.g(), g1.clone()),
    );
    let matching_residual = value.matching_residual(cm);
    if !matching_residual.is_finite() {
        return Err(Error::numerical("surface transport produced non-finite values"));
    }
    if matching_residual > TARGET_MATCHING_HARD_LIMIT {
        return Err(Error::TargetMatching {
            residual: matching_residual,
            limit: TARGET_MATCHING_HARD_LIMIT,
        });
    }
    Ok(SurfaceTransportResult {
        g_source: value.source().clone(),
        k: value.h().clone(),
        g_target: value.target().clone(),
        matching_residual,
    })
}

/// The 2-functor of a fake-flat pair: paths to `G`, bigons to 2-morphisms.
#[derive(Clone, Debug)]
pub struct TwoFunctor {
    pair: ConnectionPair,
    cfg: IntegratorConfig,
}

pub fn two_functor(pair: &ConnectionPair, cfg: &IntegratorConfig) -> TwoFunctor {
    TwoFunctor {
        pair: pair.clone(),
        cfg: *cfg,
    }
}

impl TwoFunctor {
    pub fn pair(&self) -> &ConnectionPair {
        &self.pair
    }

    pub fn config(&self) -> &IntegratorConfig {
        &self.cfg
    }

    pub fn path(&self, path: &Path) -> Result<GroupElement> {
        path_transport(self.pair.a(), path, &self.cfg)
    }

    pub fn bigon(&self, bigon: &Bigon) -> Result<TwoMorphismValue> {
        Ok(surface_transport(&self.pair, bigon, &self.cfg)?.value())
    }
}

/// The `E G`-valued 2-functor of a connection alone:
/// `Σ ↦ (F(γ₀), F(γ₁)·F(γ₀)⁻¹, F(γ₁))`.
pub fn derivative_2functor(cm: &CrossedModule, a: &OneFormField, bigon: &Bigon, cfg: &IntegratorConfig) -> Result<TwoMorphismValue> {
    let f0 = path_transport(a, &bigon.source(), cfg)?;
    let f1 = path_transport(a, &bigon.target(), cfg)?;
    let h = f1.mul(&f0.inverse());
    let value = TwoMorphismValue::from_parts(f0, GroupElement::trusted(*cm.h(), h.into_matrix()), f1);
    Ok(value)
}

/// Both sides of the non-abelian Stokes theorem.
#[derive(Clone, Debug)]
pub struct StokesReport {
    /// `F_A(γ)` by path transport.
    pub lhs: GroupElement,
    /// Ordered exponential of the conjugated curvature over the surface.
    pub rhs: GroupElement,
    pub error: f64,
}

/// Compares the holonomy of the target path of a bigon `Σ : id_x ⇒ γ` with
/// the ordered surface exponential `w(1)`, `w' = -w·X(s)`,
/// `X(s) = ∫ Ad⁻¹_{F(γ_{s,t})} K_A(∂ₛΣ, ∂ₜΣ) dt`.
pub fn stokes_check(a: &OneFormField, contraction: &Bigon, cfg: &IntegratorConfig) -> Result<StokesReport> {
    cfg.validate()?;
    check_dim(a.ambient_dim(), contraction.dim(), "bigon")?;
    let d = a.descriptor();
    let lhs = path_transport(a, &contraction.target(), cfg)?;
    let w = simpson_weights(cfg.n_quad_t)?;
    let n = cfg.n_steps_surface_s;
    let nt = cfg.n_quad_t;
    let ht = 1.0 / nt as f64;
    let fiber = |s: f64| -> Result<CMat> {
        let conn = |j: &BigonJet| a.eval_matrix(j.point.as_slice(), j.dt.as_slice());
        let mut u = d.identity_matrix();
        let mut acc = CMat::zeros(d.dim(), d.dim());
        let mut jet = contraction.jet(s, 0.0);
        let a_first = conn(&jet);
        for k in 0..=nt {
            let kk = curvature_two_form(a, jet.point.as_slice(), jet.ds.as_slice(), jet.dt.as_slice());
            let uinv = d.invert(&u)?;
            acc += scaled(&(&uinv * kk.matrix() * &u), w[k]);
            if k == nt {
                break;
            }
            let (t0, t1) = (k as f64 * ht, (k + 1) as f64 * ht);
            let a_start = if k == 0 { a_first.clone() } else { conn(&contraction.jet(s, one_sided(t0, 1.0))) };
            let a_mid = conn(&contraction.jet(s, t0 + 0.5 * ht));
            let a_end = conn(&contraction.jet(s, one_sided(t1, -1.0)));
            u = retract_if(d, rk4_left_step(&u, &a_start, &a_mid, &a_end, ht), cfg.retraction);
            jet = contraction.jet(s, t1);
        }
        Ok(acc)
    };
    let xs: Vec<CMat> = (0..=2 * n)
        .into_par_iter()
        .map(|k| fiber(k as f64 / (2 * n) as f64))
        .collect::<Result<_>>()?;
    let hs = 1.0 / n as f64;
    let mut wm = d.identity_matrix();
    for k in 0..n {
        wm = retract_if(d, rk4_right_step(&wm, &xs[2 * k], &xs[2 * k + 1], &xs[2 * k + 2], hs), cfg.retraction);
    }
    let rhs = finish(d, wm, cfg.retraction)?;
    let error = lhs.distance(&rhs);
    Ok(StokesReport { lhs, rhs, error })
}

/// A transformation `(g, φ)` between the 2-functors of two fake-flat pairs.
#[derive(Clone, Debug)]
pub struct Transformation {
    pub g: GroupField,
    pub phi: OneFormField,
}

impl Transformation {
    /// The identity transformation `(1, 0)` on `ℝⁿ`.
    pub fn identity(cm: &CrossedModule, n: usize) -> Self {
        Self {
            g: GroupField::constant(&GroupElement::identity(*cm.g()), n),
            phi: OneFormField::zero(*cm.h(), n),
        }
    }
}

/// The target pair `(A', B')` of a transformation `(g, φ)` out of `pair`:
///
/// ```text
/// A' = Ad_g(A) - dg·g⁻¹ - t_*φ
/// B' = (α_g)_*B - α_*(A'∧φ) - dφ - [φ∧φ]
/// ```
///
/// The components are native closures, so the fake-flatness gate uses
/// difference quotients.
pub fn transformed_pair(pair: &ConnectionPair, tr: &Transformation) -> Result<ConnectionPair> {
    let cm = pair.crossed_module().clone();
    let n = pair.ambient_dim();
    let gd = *cm.g();
    let a_components = (0..n)
        .map(|i| {
            let (cm, a, g) = (cm.clone(), pair.a().clone(), tr.g.clone());
            let phi = tr.phi.clone();
            MatrixField::native(gd.dim(), move |x| {
                let gm = g.eval_matrix(x);
                let ginv = gd.invert(&gm).expect("group element");
                let ai = &a.components()[i];
                let pi = &phi.components()[i];
                &gm * ai.eval(x) * &ginv - g.field().partial(x, i) * &ginv - cm.t_star_matrix(&pi.eval(x))
            })
        })
        .collect();
    let a2 = OneFormField::new(gd, a_components)?;
    let b_components = pairs(n)
        .into_iter()
        .map(|(i, j)| {
            let (cm, b, g) = (cm.clone(), pair.b().clone(), tr.g.clone());
            let (phi, a2) = (tr.phi.clone(), a2.clone());
            MatrixField::native(cm.h().dim(), move |x| {
                let gm = g.eval_matrix(x);
                let (ai, aj) = (a2.components()[i].eval(x), a2.components()[j].eval(x));
                let (pi, pj) = (phi.components()[i].eval(x), phi.components()[j].eval(x));
                cm.alpha_g_star_matrix(&gm, &b.component(x, i, j))
                    - (cm.alpha_star_matrix(&ai, &pj) - cm.alpha_star_matrix(&aj, &pi))
                    - phi.curvature_component(x, i, j)
            })
        })
        .collect();
    let b2 = TwoFormField::new(*cm.h(), n, b_components)?;
    ConnectionPair::new(&cm, a2, b2)
}

/// Output of [`transformation_transport`].
#[derive(Clone, Debug)]
pub struct TransformationTransport {
    /// `h(γ)`, the `H`-part of the path-ordered exponential of `(A', φ)`.
    pub h: GroupElement,
    /// The 2-morphism `h(γ)⁻¹ : g(y)·F(γ) ⇒ F'(γ)·g(x)`.
    pub whisker: TwoMorphismValue,
    pub matching_residual: f64,
}

/// `h(γ)` from `h' = -φ(γ')·h - (α_h)_*(A'(γ'))`, `h(0) = 1`, together
/// with the square `F'(γ)·g(x) = t(h(γ)⁻¹)·g(y)·F(γ)`.
pub fn transformation_transport(
    cm: &CrossedModule,
    a_source: &OneFormField,
    a_target: &OneFormField,
    tr: &Transformation,
    path: &Path,
    cfg: &IntegratorConfig,
) -> Result<TransformationTransport> {
    cfg.validate()?;
    check_dim(a_source.ambient_dim(), path.dim(), "path")?;
    let h = transformation_h(cm, a_target, &tr.phi, path, cfg)?;
    let f = path_transport(a_source, path, cfg)?;
    let f2 = path_transport(a_target, path, cfg)?;
    let gx = tr.g.eval(path.start().as_slice());
    let gy = tr.g.eval(path.end().as_slice());
    let whisker = TwoMorphismValue::from_parts(gy.mul(&f), h.inverse(), f2.mul(&gx));
    let matching_residual = whisker.matching_residual(cm);
    if !matching_residual.is_finite() || matching_residual > TARGET_MATCHING_HARD_LIMIT {
        return Err(Error::TargetMatching {
            residual: matching_residual,
            limit: TARGET_MATCHING_HARD_LIMIT,
        });
    }
    Ok(TransformationTransport {
        h,
        whisker,
        matching_residual,
    })
}

fn transformation_h(
    cm: &CrossedModule,
    a_target: &OneFormField,
    phi: &OneFormField,
    path: &Path,
    cfg: &IntegratorConfig,
) -> Result<GroupElement> {
    let hd = cm.h();
    let n = cfg.n_steps_path;
    let step = 1.0 / n as f64;
    let mut rhs = |t: f64, h: &CMat| -> CMat {
        let (x, v) = path.jet(t);
        let p = phi.eval_matrix(x.as_slice(), v.as_slice());
        let a = a_target.eval_matrix(x.as_slice(), v.as_slice());
        -(p * h) - cm.alpha_h_star_matrix(h, &a)
    };
    let mut h = hd.identity_matrix();
    for k in 0..n {
        h = retract_if(hd, rk4_step(&h, k as f64 * step, step, &mut rhs), cfg.retraction);
    }
    finish(hd, h, cfg.retraction)
}

/// The transformation `(t(a)·g, Ad_a(φ) - da·a⁻¹ - (α_a)_*(A')·a⁻¹)` reached
/// from `tr` by the modification `a : ℝⁿ → H`, where `A'` is the target
/// connection.
pub fn modified_transformation(
    cm: &CrossedModule,
    tr: &Transformation,
    a: &GroupField,
    a_target: &OneFormField,
) -> Result<Transformation> {
    let n = tr.g.ambient_dim();
    let (c, af, g1) = (cm.clone(), a.clone(), tr.g.clone());
    let g = GroupField::new(
        *cm.g(),
        n,
        MatrixField::native(cm.g().dim(), move |x| c.t_matrix(&af.eval_matrix(x)) * g1.eval_matrix(x)),
    )?;
    let components = (0..n)
        .map(|i| {
            let (c, af, phi, at) = (cm.clone(), a.clone(), tr.phi.clone(), a_target.clone());
            MatrixField::native(cm.h().dim(), move |x| {
                let am = af.eval_matrix(x);
                let ainv = c.h().invert(&am).expect("group element");
                let p = phi.components()[i].eval(x);
                &am * p * &ainv
                    - af.field().partial(x, i) * &ainv
                    - c.alpha_h_star_matrix(&am, &at.components()[i].eval(x)) * &ainv
            })
        })
        .collect();
    let phi = OneFormField::new(*cm.h(), components)?;
    Ok(Transformation { g, phi })
}

/// Defect of the whisker identity of a modification `a : (g₁, φ₁) ⇛ (g₂, φ₂)`:
/// `‖α(F'(γ), a(x))·h₁(γ)⁻¹ - h₂(γ)⁻¹·a(y)‖`.
pub fn modification_whisker(
    cm: &CrossedModule,
    a_target: &OneFormField,
    modification: &GroupField,
    first: &Transformation,
    second: &Transformation,
    path: &Path,
    cfg: &IntegratorConfig,
) -> Result<f64> {
    cfg.validate()?;
    let f2 = path_transport(a_target, path, cfg)?;
    let h1 = transformation_h(cm, a_target, &first.phi, path, cfg)?;
    let h2 = transformation_h(cm, a_target, &second.phi, path, cfg)?;
    let ax = modification.eval(path.start().as_slice());
    let ay = modification.eval(path.end().as_slice());
    let lhs = cm.alpha(&f2, &ax).mul(&h1.inverse());
    let rhs = h2.inverse().mul(&ay);
    Ok(lhs.distance(&rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::TwoFormField;
    use crate::geometry::{path_compose, path_reverse, standard_bigon, SurfaceMap};
    use crate::higher_group::{make_b_abelian, make_eg};
    use crate::lie_core::expm;
    use nalgebra::DVector;

    fn pt(v: &[f64]) -> DVector<f64> {
        DVector::from_row_slice(v)
    }

    fn su2_a() -> OneFormField {
        OneFormField::from_exprs(
            GroupDescriptor::su(2),
            &[
                vec![vec!["i*x2", "x1*x2 + 0.5"], vec!["-x1*x2 - 0.5", "-i*x2"]],
                vec![vec!["i*x1^2", "i*cos(x1)"], vec!["i*cos(x1)", "-i*x1^2"]],
            ],
        )
        .unwrap()
    }

    #[test]
    fn constant_connection_gives_exponential() {
        let d = GroupDescriptor::su(2);
        let a = OneFormField::from_exprs(
            d,
            &[
                vec![vec!["0.3*i", "0.2"], vec!["-0.2", "-0.3*i"]],
                vec![vec!["0", "0.7*i"], vec!["0.7*i", "0"]],
            ],
        )
        .unwrap();
        let p = Path::line(pt(&[0.0, 0.0]), pt(&[0.4, 0.9]));
        let f = path_transport(&a, &p, &IntegratorConfig::default()).unwrap();
        let gen = a.eval_matrix(&[0.0, 0.0], &[0.4, 0.9]);
        let expect = expm(&(-gen));
        assert!((f.matrix() - expect).norm() < 1e-10);
    }

    #[test]
    fn functoriality_of_path_transport() {
        let a = su2_a();
        let cfg = IntegratorConfig::default();
        let p1 = Path::line(pt(&[0.1, 0.2]), pt(&[0.7, 0.4]));
        let p2 = Path::line(pt(&[0.7, 0.4]), pt(&[0.3, 0.9]));
        let f1 = path_transport(&a, &p1, &cfg).unwrap();
        let f2 = path_transport(&a, &p2, &cfg).unwrap();
        let f12 = path_transport(&a, &path_compose(&p1, &p2).unwrap(), &cfg).unwrap();
        assert!(f12.distance(&f2.mul(&f1)) < 1e-9);
        let back = path_transport(&a, &path_reverse(&p1), &cfg).unwrap();
        assert!(back.distance(&f1.inverse()) < 1e-9);
    }

    #[test]
    fn small_rectangle_holonomy_is_one_minus_area_times_curvature() {
        let a = su2_a();
        let x = [0.4, 0.3];
        let e = 1e-4;
        let corners = [
            pt(&[x[0], x[1]]),
            pt(&[x[0] + e, x[1]]),
            pt(&[x[0] + e, x[1] + e]),
            pt(&[x[0], x[1] + e]),
        ];
        let cfg = IntegratorConfig::default();
        let mut u = GroupElement::identity(GroupDescriptor::su(2));
        for k in 0..4 {
            let p = Path::line(corners[k].clone(), corners[(k + 1) % 4].clone());
            u = path_transport(&a, &p, &cfg).unwrap().mul(&u);
        }
        let k = curvature_two_form(&a, &[x[0] + e / 2.0, x[1] + e / 2.0], &[1.0, 0.0], &[0.0, 1.0]);
        let defect = (u.matrix() - CMat::identity(2, 2)) * C64::new(-1.0 / (e * e), 0.0);
        assert!((defect - k.matrix()).norm() < 1e-3);
    }

    #[test]
    fn eg_surface_transport_matches_boundary() {
        let cm = make_eg(GroupDescriptor::su(2));
        let pair = ConnectionPair::eg_curvature_pair(&cm, su2_a()).unwrap();
        let gamma = SurfaceMap::plane(pt(&[0.2, 0.1]), pt(&[0.5, 0.2]), pt(&[-0.1, 0.6]));
        let b = standard_bigon(&gamma, 1.0, 1.0);
        let st = surface_transport(&pair, &b, &IntegratorConfig::default()).unwrap();
        assert!(st.matching_residual < 1e-6, "{}", st.matching_residual);
    }

    #[test]
    fn abelian_surface_transport_is_exponential_of_flux() {
        let cm = make_b_abelian(GroupDescriptor::u1()).unwrap();
        let a = OneFormField::zero(GroupDescriptor::trivial(), 2);
        let b = TwoFormField::from_exprs(GroupDescriptor::u1(), 2, &[((1, 2), vec![vec!["i*(1 + x1*x2)"]])]).unwrap();
        let pair = ConnectionPair::new(&cm, a, b).unwrap();
        let gamma = SurfaceMap::plane(pt(&[0.0, 0.0]), pt(&[1.0, 0.0]), pt(&[0.0, 1.0]));
        let big = standard_bigon(&gamma, 0.5, 0.8);
        let cfg = IntegratorConfig {
            n_quad_t: 256,
            ..IntegratorConfig::default()
        };
        let k = surface_transport(&pair, &big, &cfg).unwrap();
        let flux = 0.5 * 0.8 + (0.5f64.powi(2) / 2.0) * (0.8f64.powi(2) / 2.0);
        let expect = C64::new(0.0, -flux).exp();
        assert!((k.k.matrix()[(0, 0)] - expect).norm() < 1e-7, "{}", (k.k.matrix()[(0, 0)] - expect).norm());
    }

    #[test]
    fn identity_bigon_gives_identity() {
        let cm = make_eg(GroupDescriptor::su(2));
        let pair = ConnectionPair::eg_curvature_pair(&cm, su2_a()).unwrap();
        let p = Path::line(pt(&[0.1, 0.1]), pt(&[0.8, 0.6]));
        let k = surface_transport(&pair, &Bigon::identity(&p), &IntegratorConfig::default()).unwrap();
        assert!(k.k.distance(&GroupElement::identity(GroupDescriptor::su(2))) < 1e-14);
    }

    #[test]
    fn odd_quadrature_is_rejected() {
        let cfg = IntegratorConfig {
            n_quad_t: 33,
            ..IntegratorConfig::default()
        };
        assert!(cfg.validate().is_err());
    }
}
