//! Transgression of a 2-functor to the free loop space.
//!
//! A loop is parameterized by `z ∈ [0, 1]` with base point `τ(0)`; the arc
//! from `z` to the base point runs forward in `z`. For a variation `δτ`,
//!
//! ```text
//! A_F(δτ) = A_{τ(0)}(δτ(0))
//! φ_F(δτ) = ∫₀¹ (α_{F(τ|[z,1])})_* B(δτ(z), τ'(z)) dz
//! ```
//!
//! The orientation of the fibre integral is the one for which the 1-forms
//! `(A_F, φ_F)` integrate to the same `G ⋉ H` element as surface transport
//! over the swept cylinder, see [`transgression_consistency`].

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::forms::{ConnectionPair, OneFormField};
use crate::geometry::{loop_to_path, standard_bigon, BigonJet, Loop, Path, Point, SmoothingProfile, SurfaceMap};
use crate::higher_group::TwoMorphismValue;
use crate::lie_core::{AlgebraElement, CMat, GroupElement, C64};
use crate::quadrature::simpson_weights;
use crate::transport::{integrate_left, path_transport, rk4_left_step, rk4_step, surface_transport, IntegratorConfig};

/// `(point, ∂ₜ, ∂_z)` of a family of loops.
pub type LoopPathFn = dyn Fn(f64, f64) -> (Point, Point, Point) + Send + Sync;

/// A path `t ↦ γ(t)` in loop space, `γ(t)(z)` smooth in both arguments and
/// sitting near `t = 0` and `t = 1`.
#[derive(Clone)]
pub struct LoopPath {
    dim: usize,
    eval: Arc<LoopPathFn>,
}

impl fmt::Debug for LoopPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LoopPath").field("dim", &self.dim).finish()
    }
}

impl LoopPath {
    pub fn new(dim: usize, f: impl Fn(f64, f64) -> (Point, Point, Point) + Send + Sync + 'static) -> Self {
        Self {
            dim,
            eval: Arc::new(f),
        }
    }

    /// Circles in the plane `(e₁, e₂)` whose centre moves from `c` to `c + axis`
    /// and whose radius moves from `r0` to `r1`, both along the profile.
    pub fn cylinder(center: Point, axis: Point, r0: f64, r1: f64, e1: Point, e2: Point, profile: SmoothingProfile) -> Self {
        let dim = center.len();
        let tau = 2.0 * std::f64::consts::PI;
        Self::new(dim, move |t, z| {
            let (b, db) = profile.eval(t);
            let r = r0 + (r1 - r0) * b;
            let dr = (r1 - r0) * db;
            let (s, c) = (tau * z).sin_cos();
            let radial = &e1 * c + &e2 * s;
            let point = &center + &axis * b + &radial * r;
            let dt = &axis * db + &radial * dr;
            let dz = (&e2 * c - &e1 * s) * (r * tau);
            (point, dt, dz)
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn jet(&self, t: f64, z: f64) -> (Point, Point, Point) {
        (self.eval)(t, z)
    }

    /// The loop `γ(t)`.
    pub fn slice(&self, t: f64) -> Loop {
        let f = self.eval.clone();
        Loop::new(self.dim, move |z| {
            let (p, _, dz) = f(t, z);
            (p, dz)
        })
    }

    /// The tangent `(γ(t), ∂ₜγ(t))` in loop space.
    pub fn tangent(&self, t: f64) -> LoopTangent {
        let f = self.eval.clone();
        LoopTangent::new(self.slice(t), move |z| f(t, z).1)
    }

    /// The base point path `t ↦ γ(t)(0)`.
    pub fn base_path(&self) -> Path {
        let f = self.eval.clone();
        Path::new(self.dim, move |t| {
            let (p, dt, _) = f(t, 0.0);
            (p, dt)
        })
    }

    /// The map `(s, t) ↦ γ(t)(s)`.
    pub fn surface(&self) -> SurfaceMap {
        let f = self.eval.clone();
        SurfaceMap::new(self.dim, move |s, t| {
            let (point, dt, ds) = f(t, s);
            BigonJet { point, ds, dt }
        })
    }
}

type VariationFn = dyn Fn(f64) -> Point + Send + Sync;

/// A tangent vector to loop space: a loop and a variation field along it.
#[derive(Clone)]
pub struct LoopTangent {
    pub base: Loop,
    variation: Arc<VariationFn>,
}

impl fmt::Debug for LoopTangent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LoopTangent").field("base", &self.base).finish()
    }
}

impl LoopTangent {
    pub fn new(base: Loop, variation: impl Fn(f64) -> Point + Send + Sync + 'static) -> Self {
        Self {
            base,
            variation: Arc::new(variation),
        }
    }

    pub fn variation(&self, z: f64) -> Point {
        (self.variation)(z)
    }

    /// `c·δτ` on the same loop.
    pub fn scaled(&self, c: f64) -> LoopTangent {
        let v = self.variation.clone();
        LoopTangent::new(self.base.clone(), move |z| v(z) * c)
    }
}

fn check_dim(pair_dim: usize, dim: usize) -> Result<()> {
    if pair_dim != dim {
        return Err(Error::domain(format!(
            "loop lives in R^{dim} but the forms are defined on R^{pair_dim}"
        )));
    }
    Ok(())
}

/// `h_F(τ) = F(τ)`, the holonomy around the loop from its base point.
pub fn loop_holonomy(a: &OneFormField, tau: &Loop, cfg: &IntegratorConfig) -> Result<GroupElement> {
    loop_holonomy_with_profile(a, tau, SmoothingProfile::default(), cfg)
}

pub fn loop_holonomy_with_profile(
    a: &OneFormField,
    tau: &Loop,
    profile: SmoothingProfile,
    cfg: &IntegratorConfig,
) -> Result<GroupElement> {
    check_dim(a.ambient_dim(), tau.dim())?;
    path_transport(a, &loop_to_path(tau, profile), cfg)
}

/// `A_F(δτ) = A_{τ(0)}(δτ(0))`.
pub fn transgressed_a(pair: &ConnectionPair, tangent: &LoopTangent) -> Result<AlgebraElement> {
    check_dim(pair.ambient_dim(), tangent.base.dim())?;
    let x = tangent.base.base_point();
    let v = tangent.variation(0.0);
    Ok(pair.a().eval(x.as_slice(), v.as_slice()))
}

/// `φ_F(δτ)` by Simpson's rule on `cfg.n_quad_t` intervals. The arc
/// transports `F(τ|[z,1]) = P(1)·P(z)⁻¹` come from one sweep of
/// `P(z) = F(τ|[0,z])` around the loop.
pub fn transgressed_phi(pair: &ConnectionPair, tangent: &LoopTangent, cfg: &IntegratorConfig) -> Result<AlgebraElement> {
    cfg.validate()?;
    check_dim(pair.ambient_dim(), tangent.base.dim())?;
    let cm = pair.crossed_module();
    let (a, b) = (pair.a(), pair.b());
    let gd = cm.g();
    let n = cfg.n_quad_t;
    let h = 1.0 / n as f64;
    let w = simpson_weights(n)?;
    let tau = &tangent.base;
    let conn = |z: f64| {
        let (x, v) = tau.jet(z);
        a.eval_matrix(x.as_slice(), v.as_slice())
    };
    let mut transports = Vec::with_capacity(n + 1);
    let mut u = gd.identity_matrix();
    transports.push(u.clone());
    let mut a_here = conn(0.0);
    for k in 0..n {
        let z = k as f64 * h;
        let a_next = conn(z + h);
        u = rk4_left_step(&u, &a_here, &conn(z + 0.5 * h), &a_next, h);
        if cfg.retraction {
            u = gd.retract(&u);
        }
        transports.push(u.clone());
        a_here = a_next;
    }
    let total = transports[n].clone();
    let hd = cm.h().dim();
    let mut acc = CMat::zeros(hd, hd);
    for (k, p) in transports.iter().enumerate() {
        let z = k as f64 * h;
        let (x, dz) = tau.jet(z);
        let dv = tangent.variation(z);
        let area = b.eval_matrix(x.as_slice(), dv.as_slice(), dz.as_slice());
        let arc = &total * gd.invert(p)?;
        acc += cm.alpha_g_star_matrix(&arc, &area) * C64::new(w[k], 0.0);
    }
    if !acc.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::numerical("transgressed 1-form is not finite"));
    }
    Ok(AlgebraElement::trusted(*cm.h(), acc))
}

/// The image of a path in loop space under the loop functor.
#[derive(Clone, Debug)]
pub struct LoopPathMorphism {
    /// `F(b∘γ)`, transport along the base point path.
    pub base_transport: GroupElement,
    /// Surface transport over `m(γ)`: from `F(γ(1))·F(b∘γ)` to `F(b∘γ)·F(γ(0))`.
    pub value: TwoMorphismValue,
    pub matching_residual: f64,
}

/// Surface transport over the bigon `m(γ)`, the standard bigon `Σ(1,1)`
/// pushed forward along `(s, t) ↦ γ(t)(s)`.
pub fn loop_path_two_morphism(pair: &ConnectionPair, gamma: &LoopPath, cfg: &IntegratorConfig) -> Result<LoopPathMorphism> {
    check_dim(pair.ambient_dim(), gamma.dim())?;
    let bigon = standard_bigon(&gamma.surface(), 1.0, 1.0);
    let st = surface_transport(pair, &bigon, cfg)?;
    let base_transport = path_transport(pair.a(), &gamma.base_path(), cfg)?;
    Ok(LoopPathMorphism {
        base_transport,
        value: st.value(),
        matching_residual: st.matching_residual,
    })
}

/// Comparison of the two routes from a 2-functor to loop space data.
#[derive(Clone, Debug)]
pub struct ConsistencyReport {
    /// `k(m(γ))⁻¹`, the `H`-part after the inversion of the trivialization.
    pub functor_h: GroupElement,
    /// `h(1)` from the `G ⋉ H` equation driven by `(A_F, φ_F)`.
    pub forms_h: GroupElement,
    /// `‖functor_h - forms_h‖`
    pub defect: f64,
    /// `‖F(b∘γ) - g(1)‖` for the `G`-parts.
    pub base_defect: f64,
}

/// Integrates `g' = -A_F(γ')·g`, `h' = -φ_F(γ')·h - (α_h)_*(A_F(γ'))` over
/// `t ∈ [0, 1]` and compares with surface transport over `m(γ)`.
pub fn transgression_consistency(pair: &ConnectionPair, gamma: &LoopPath, cfg: &IntegratorConfig) -> Result<ConsistencyReport> {
    cfg.validate()?;
    check_dim(pair.ambient_dim(), gamma.dim())?;
    let cm = pair.crossed_module();
    let n = cfg.n_steps_path;
    let drivers: Vec<(CMat, CMat)> = (0..=2 * n)
        .into_par_iter()
        .map(|k| {
            let t = k as f64 / (2 * n) as f64;
            let tangent = gamma.tangent(t);
            let a = transgressed_a(pair, &tangent)?.into_matrix();
            let phi = transgressed_phi(pair, &tangent, cfg)?.into_matrix();
            Ok((a, phi))
        })
        .collect::<Result<_>>()?;
    let a_samples: Vec<CMat> = drivers.iter().map(|d| d.0.clone()).collect();
    let g = integrate_left(cm.g(), &a_samples, cfg.retraction)?;
    let step = 1.0 / n as f64;
    let mut h = cm.h().identity_matrix();
    for k in 0..n {
        let mut rhs = |t: f64, y: &CMat| -> CMat {
            let idx = (t * (2 * n) as f64).round() as usize;
            let (a, phi) = &drivers[idx.min(2 * n)];
            -(phi * y) - cm.alpha_h_star_matrix(y, a)
        };
        h = rk4_step(&h, k as f64 * step, step, &mut rhs);
        if cfg.retraction {
            h = cm.h().retract(&h);
        }
    }
    let m = loop_path_two_morphism(pair, gamma, cfg)?;
    let functor_h = m.value.h().inverse();
    let forms_h = GroupElement::trusted(*cm.h(), h);
    let defect = functor_h.distance(&forms_h);
    let base_defect = m.base_transport.distance(&GroupElement::trusted(*cm.g(), g));
    Ok(ConsistencyReport {
        functor_h,
        forms_h,
        defect,
        base_defect,
    })
}
