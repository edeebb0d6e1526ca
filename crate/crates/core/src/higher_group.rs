//! Smooth crossed modules `(G, H, t, α)` and the 2-morphisms of the
//! associated strict 2-group.
//!
//! Three kinds are built in with closed-form differentials: `B A` for an
//! abelian group `A`, `E G` (`H = G`, `t = id`, `α` = conjugation) and the
//! inner automorphism 2-group of `SU(2)`, realized with `G = SO(3)` acting on
//! `SU(2)` through the rotation of its quaternion vector part. User supplied
//! evaluators form a fourth kind whose differentials are taken numerically.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::lie_core::{
    commutator, expm, AlgebraElement, CMat, GroupDescriptor, GroupElement, GroupFamily, C64,
};

/// Hard limit for composing 2-morphisms whose boundaries do not match.
pub const COMPOSITION_TOLERANCE: f64 = 1e-6;

pub type TargetMap = Arc<dyn Fn(&CMat) -> CMat + Send + Sync>;
pub type ActionMap = Arc<dyn Fn(&CMat, &CMat) -> CMat + Send + Sync>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CrossedModuleKind {
    BAbelian,
    EG,
    AutInner,
    Custom,
}

#[derive(Clone)]
pub struct CrossedModule {
    kind: CrossedModuleKind,
    g: GroupDescriptor,
    h: GroupDescriptor,
    t_map: Option<TargetMap>,
    action: Option<ActionMap>,
    fd_step: f64,
}

impl fmt::Debug for CrossedModule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CrossedModule")
            .field("kind", &self.kind)
            .field("g", &self.g)
            .field("h", &self.h)
            .finish()
    }
}

/// `B A`: trivial `G`, `H = A` abelian.
pub fn make_b_abelian(a: GroupDescriptor) -> Result<CrossedModule> {
    if !a.is_abelian() {
        return Err(Error::domain(format!("{} is not abelian", a.name())));
    }
    Ok(CrossedModule {
        kind: CrossedModuleKind::BAbelian,
        g: GroupDescriptor::trivial(),
        h: a,
        t_map: None,
        action: None,
        fd_step: 1e-4,
    })
}

/// `E G`: `H = G`, `t = id`, `α(g, h) = g h g⁻¹`.
pub fn make_eg(g: GroupDescriptor) -> CrossedModule {
    CrossedModule {
        kind: CrossedModuleKind::EG,
        g,
        h: g,
        t_map: None,
        action: None,
        fd_step: 1e-4,
    }
}

/// Inner automorphism 2-group of `H`. Only `H = SU(2)` is supported; `G` is
/// its image `SO(3) = SU(2)/{±1}`.
pub fn make_aut_inner(h: GroupDescriptor) -> Result<CrossedModule> {
    if h.family() != GroupFamily::SU(2) {
        return Err(Error::domain(format!(
            "inner automorphism 2-group is implemented for SU(2) only, not {}",
            h.name()
        )));
    }
    Ok(CrossedModule {
        kind: CrossedModuleKind::AutInner,
        g: GroupDescriptor::so(3).with_tolerance(h.tolerance())?,
        h,
        t_map: None,
        action: None,
        fd_step: 1e-4,
    })
}

impl CrossedModule {
    /// A crossed module from user evaluators. The axioms are not checked
    /// here; see [`verify_axioms`].
    pub fn custom(
        g: GroupDescriptor,
        h: GroupDescriptor,
        t: impl Fn(&CMat) -> CMat + Send + Sync + 'static,
        alpha: impl Fn(&CMat, &CMat) -> CMat + Send + Sync + 'static,
    ) -> Self {
        Self {
            kind: CrossedModuleKind::Custom,
            g,
            h,
            t_map: Some(Arc::new(t)),
            action: Some(Arc::new(alpha)),
            fd_step: 1e-4,
        }
    }

    /// Parses `b_u1`, `eg:<group>` or `aut_inner:<group>`.
    pub fn parse(name: &str) -> Result<Self> {
        let lower = name.trim().to_ascii_lowercase();
        if lower == "b_u1" {
            return make_b_abelian(GroupDescriptor::u1());
        }
        if let Some(group) = lower.strip_prefix("b_") {
            return make_b_abelian(GroupDescriptor::parse(group)?);
        }
        if let Some(group) = lower.strip_prefix("eg:") {
            return Ok(make_eg(GroupDescriptor::parse(group)?));
        }
        if let Some(group) = lower.strip_prefix("aut_inner:") {
            return make_aut_inner(GroupDescriptor::parse(group)?);
        }
        Err(Error::domain(format!("unknown crossed module `{name}`")))
    }

    pub fn kind(&self) -> CrossedModuleKind {
        self.kind
    }

    pub fn g(&self) -> &GroupDescriptor {
        &self.g
    }

    pub fn h(&self) -> &GroupDescriptor {
        &self.h
    }

    pub fn name(&self) -> String {
        match self.kind {
            CrossedModuleKind::BAbelian => format!("b_{}", self.h.name().to_ascii_lowercase()),
            CrossedModuleKind::EG => format!("eg:{}", self.g.name()),
            CrossedModuleKind::AutInner => format!("aut_inner:{}", self.h.name()),
            CrossedModuleKind::Custom => format!("custom({}, {})", self.g.name(), self.h.name()),
        }
    }

    // Matrix-level maps. These accept arbitrary matrices of the right shape
    // so that integrators can apply them to stage values and tangent vectors.

    /// `t(h)`.
    pub fn t_matrix(&self, h: &CMat) -> CMat {
        match self.kind {
            CrossedModuleKind::BAbelian => self.g.identity_matrix(),
            CrossedModuleKind::EG => h.clone(),
            CrossedModuleKind::AutInner => su2_rotation(h),
            CrossedModuleKind::Custom => (self.t_map.as_ref().unwrap())(h),
        }
    }

    /// `α(g, h)`.
    pub fn alpha_matrix(&self, g: &CMat, h: &CMat) -> CMat {
        match self.kind {
            CrossedModuleKind::BAbelian => h.clone(),
            CrossedModuleKind::EG => {
                let ginv = self.g.invert(g).expect("invertible group element");
                g * h * ginv
            }
            CrossedModuleKind::AutInner => su2_act(g, h),
            CrossedModuleKind::Custom => (self.action.as_ref().unwrap())(g, h),
        }
    }

    /// `t_*(Y)` for `Y` in the Lie algebra of `H`.
    pub fn t_star_matrix(&self, y: &CMat) -> CMat {
        match self.kind {
            CrossedModuleKind::BAbelian => CMat::zeros(1, 1),
            CrossedModuleKind::EG => y.clone(),
            CrossedModuleKind::AutInner => su2_ad(y),
            CrossedModuleKind::Custom => {
                let e = self.fd_step;
                let p = self.t_matrix(&expm(&(y * C64::new(e, 0.0))));
                let m = self.t_matrix(&expm(&(y * C64::new(-e, 0.0))));
                (p - m) * C64::new(0.5 / e, 0.0)
            }
        }
    }

    /// `α_*(X, Y)`, the derivative of `α` at the identity in both slots.
    pub fn alpha_star_matrix(&self, x: &CMat, y: &CMat) -> CMat {
        match self.kind {
            CrossedModuleKind::BAbelian => CMat::zeros(self.h.dim(), self.h.dim()),
            CrossedModuleKind::EG => commutator(x, y),
            CrossedModuleKind::AutInner => su2_act_vector(x, y),
            CrossedModuleKind::Custom => {
                let e = self.fd_step;
                let gp = expm(&(x * C64::new(e, 0.0)));
                let gm = expm(&(x * C64::new(-e, 0.0)));
                let hp = expm(&(y * C64::new(e, 0.0)));
                let hm = expm(&(y * C64::new(-e, 0.0)));
                (self.alpha_matrix(&gp, &hp) - self.alpha_matrix(&gp, &hm)
                    - self.alpha_matrix(&gm, &hp)
                    + self.alpha_matrix(&gm, &hm))
                    * C64::new(0.25 / (e * e), 0.0)
            }
        }
    }

    /// `(α_g)_*(Y)`, the derivative of `h ↦ α(g, h)` at the identity.
    pub fn alpha_g_star_matrix(&self, g: &CMat, y: &CMat) -> CMat {
        match self.kind {
            CrossedModuleKind::BAbelian => y.clone(),
            CrossedModuleKind::EG | CrossedModuleKind::AutInner => self.alpha_matrix(g, y),
            CrossedModuleKind::Custom => {
                let e = self.fd_step;
                let hp = expm(&(y * C64::new(e, 0.0)));
                let hm = expm(&(y * C64::new(-e, 0.0)));
                (self.alpha_matrix(g, &hp) - self.alpha_matrix(g, &hm)) * C64::new(0.5 / e, 0.0)
            }
        }
    }

    /// `(α_h)_*(X)`, the derivative of `g ↦ α(g, h)` at the identity. The
    /// result is a tangent vector at `h`.
    pub fn alpha_h_star_matrix(&self, h: &CMat, x: &CMat) -> CMat {
        match self.kind {
            CrossedModuleKind::BAbelian => CMat::zeros(self.h.dim(), self.h.dim()),
            CrossedModuleKind::EG => commutator(x, h),
            CrossedModuleKind::AutInner => su2_act_vector(x, h),
            CrossedModuleKind::Custom => {
                let e = self.fd_step;
                let gp = expm(&(x * C64::new(e, 0.0)));
                let gm = expm(&(x * C64::new(-e, 0.0)));
                (self.alpha_matrix(&gp, h) - self.alpha_matrix(&gm, h)) * C64::new(0.5 / e, 0.0)
            }
        }
    }

    // Typed wrappers.

    pub fn t(&self, h: &GroupElement) -> GroupElement {
        GroupElement::trusted(self.g, self.t_matrix(h.matrix()))
    }

    pub fn alpha(&self, g: &GroupElement, h: &GroupElement) -> GroupElement {
        GroupElement::trusted(self.h, self.alpha_matrix(g.matrix(), h.matrix()))
    }

    pub fn t_star(&self, y: &AlgebraElement) -> AlgebraElement {
        AlgebraElement::trusted(self.g, self.t_star_matrix(y.matrix()))
    }

    pub fn alpha_star(&self, x: &AlgebraElement, y: &AlgebraElement) -> AlgebraElement {
        AlgebraElement::trusted(self.h, self.alpha_star_matrix(x.matrix(), y.matrix()))
    }

    pub fn alpha_g_star(&self, g: &GroupElement, y: &AlgebraElement) -> AlgebraElement {
        AlgebraElement::trusted(self.h, self.alpha_g_star_matrix(g.matrix(), y.matrix()))
    }
}

// SU(2) helpers. A 2x2 matrix is written `c₀·1 + Σ cₖ·eₖ` with `eₖ = iσₖ`,
// the basis returned by `GroupDescriptor::su(2).algebra_basis()`.

fn su2_basis() -> [CMat; 3] {
    let b = GroupDescriptor::su(2).algebra_basis();
    [b[0].clone(), b[1].clone(), b[2].clone()]
}

fn su2_split(m: &CMat) -> (C64, [C64; 3]) {
    let half = C64::new(0.5, 0.0);
    let c0 = m.trace() * half;
    let b = su2_basis();
    let mut c = [C64::new(0.0, 0.0); 3];
    for k in 0..3 {
        c[k] = (b[k].adjoint() * m).trace() * half;
    }
    (c0, c)
}

fn su2_join(c0: C64, c: &[C64; 3]) -> CMat {
    let b = su2_basis();
    let mut m = CMat::identity(2, 2) * c0;
    for k in 0..3 {
        m += &b[k] * c[k];
    }
    m
}

fn apply3(r: &CMat, c: &[C64; 3]) -> [C64; 3] {
    let mut out = [C64::new(0.0, 0.0); 3];
    for j in 0..3 {
        for k in 0..3 {
            out[j] += r[(j, k)] * c[k];
        }
    }
    out
}

/// Matrix of `Y ↦ h Y h⁻¹` on span{iσₖ}.
fn su2_rotation(h: &CMat) -> CMat {
    let hinv = h.clone().try_inverse().expect("invertible SU(2) element");
    let b = su2_basis();
    let mut r = CMat::zeros(3, 3);
    for k in 0..3 {
        let (_, c) = su2_split(&(h * &b[k] * &hinv));
        for j in 0..3 {
            r[(j, k)] = c[j];
        }
    }
    r
}

/// Matrix of `Z ↦ [Y, Z]` on span{iσₖ}.
fn su2_ad(y: &CMat) -> CMat {
    let b = su2_basis();
    let mut r = CMat::zeros(3, 3);
    for k in 0..3 {
        let (_, c) = su2_split(&commutator(y, &b[k]));
        for j in 0..3 {
            r[(j, k)] = c[j];
        }
    }
    r
}

/// Rotation `R` acting on the vector part of `m`; linear in `m`.
fn su2_act(r: &CMat, m: &CMat) -> CMat {
    let (c0, c) = su2_split(m);
    su2_join(c0, &apply3(r, &c))
}

/// Infinitesimal rotation `X ∈ so(3)` acting on the vector part of `m`.
fn su2_act_vector(x: &CMat, m: &CMat) -> CMat {
    let (_, c) = su2_split(m);
    su2_join(C64::new(0.0, 0.0), &apply3(x, &c))
}

/// A 2-morphism `h : g ⇒ t(h)·g` of the 2-group.
#[derive(Clone, Debug)]
pub struct TwoMorphismValue {
    source: GroupElement,
    h: GroupElement,
    target: GroupElement,
}

impl TwoMorphismValue {
    /// Builds the 2-morphism with target `t(h)·source`.
    pub fn new(cm: &CrossedModule, source: GroupElement, h: GroupElement) -> Self {
        let target = cm.t(&h).mul(&source);
        Self { source, h, target }
    }

    /// Keeps an independently computed target; see [`Self::matching_residual`].
    pub fn from_parts(source: GroupElement, h: GroupElement, target: GroupElement) -> Self {
        Self { source, h, target }
    }

    pub fn source(&self) -> &GroupElement {
        &self.source
    }

    pub fn h(&self) -> &GroupElement {
        &self.h
    }

    pub fn target(&self) -> &GroupElement {
        &self.target
    }

    /// `‖t(h)·source − target‖ / max(1, ‖target‖)`.
    pub fn matching_residual(&self, cm: &CrossedModule) -> f64 {
        let lhs = cm.t_matrix(self.h.matrix()) * self.source.matrix();
        (lhs - self.target.matrix()).norm() / self.target.matrix().norm().max(1.0)
    }
}

/// Vertical composition `a • b` (first `b`, then `a`).
pub fn vcompose(a: &TwoMorphismValue, b: &TwoMorphismValue) -> Result<TwoMorphismValue> {
    let gap = b.target.distance(&a.source) / a.source.matrix().norm().max(1.0);
    if gap > COMPOSITION_TOLERANCE {
        return Err(Error::composition(format!(
            "target of the first 2-morphism differs from the source of the second by {gap:.3e}"
        )));
    }
    Ok(TwoMorphismValue {
        source: b.source.clone(),
        h: a.h.mul(&b.h),
        target: a.target.clone(),
    })
}

/// Horizontal composition `a ∘ b` where `b` is followed by `a` along paths.
pub fn hcompose(cm: &CrossedModule, a: &TwoMorphismValue, b: &TwoMorphismValue) -> TwoMorphismValue {
    TwoMorphismValue {
        source: a.source.mul(&b.source),
        h: a.h.mul(&cm.alpha(&a.source, &b.h)),
        target: a.target.mul(&b.target),
    }
}

/// Per-axiom maximum residuals over random samples.
#[derive(Clone, Debug)]
pub struct AxiomReport {
    pub samples: usize,
    pub seed: u64,
    /// `t(h₁h₂) = t(h₁)t(h₂)`
    pub t_homomorphism: f64,
    /// `α(g, h₁h₂) = α(g, h₁)α(g, h₂)`
    pub alpha_homomorphism: f64,
    /// `α(1, h) = h`
    pub alpha_identity: f64,
    /// `α(gg', h) = α(g, α(g', h))`
    pub alpha_action: f64,
    /// `t(α(g, h)) = g t(h) g⁻¹`
    pub equivariance: f64,
    /// `α(t(h), x) = h x h⁻¹`
    pub peiffer: f64,
}

impl AxiomReport {
    pub fn max_residual(&self) -> f64 {
        [
            self.t_homomorphism,
            self.alpha_homomorphism,
            self.alpha_identity,
            self.alpha_action,
            self.equivariance,
            self.peiffer,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    pub fn passes(&self, tolerance: f64) -> bool {
        self.max_residual() <= tolerance
    }

    pub fn entries(&self) -> [(&'static str, f64); 6] {
        [
            ("t_homomorphism", self.t_homomorphism),
            ("alpha_homomorphism", self.alpha_homomorphism),
            ("alpha_identity", self.alpha_identity),
            ("alpha_action", self.alpha_action),
            ("equivariance", self.equivariance),
            ("peiffer", self.peiffer),
        ]
    }
}

/// A random group element `exp(X)` with algebra coordinates uniform in
/// `[-scale, scale]`.
pub fn random_element(d: &GroupDescriptor, rng: &mut impl Rng, scale: f64) -> GroupElement {
    let coords: Vec<f64> = (0..d.algebra_dim())
        .map(|_| rng.gen_range(-scale..scale))
        .collect();
    let x = AlgebraElement::from_coordinates(*d, &coords).expect("coordinate count");
    GroupElement::trusted(*d, d.retract(&expm(x.matrix())))
}

pub fn verify_axioms(cm: &CrossedModule, n_samples: usize, seed: u64) -> AxiomReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = AxiomReport {
        samples: n_samples,
        seed,
        t_homomorphism: 0.0,
        alpha_homomorphism: 0.0,
        alpha_identity: 0.0,
        alpha_action: 0.0,
        equivariance: 0.0,
        peiffer: 0.0,
    };
    let d = |a: &CMat, b: &CMat| (a - b).norm();
    let gid = cm.g().identity_matrix();
    for _ in 0..n_samples {
        let g1 = random_element(cm.g(), &mut rng, 2.0).into_matrix();
        let g2 = random_element(cm.g(), &mut rng, 2.0).into_matrix();
        let h1 = random_element(cm.h(), &mut rng, 2.0).into_matrix();
        let h2 = random_element(cm.h(), &mut rng, 2.0).into_matrix();
        let h1inv = cm.h().invert(&h1).expect("invertible");
        let g1inv = cm.g().invert(&g1).expect("invertible");

        let r = d(&cm.t_matrix(&(&h1 * &h2)), &(cm.t_matrix(&h1) * cm.t_matrix(&h2)));
        rep.t_homomorphism = rep.t_homomorphism.max(r);

        let r = d(
            &cm.alpha_matrix(&g1, &(&h1 * &h2)),
            &(cm.alpha_matrix(&g1, &h1) * cm.alpha_matrix(&g1, &h2)),
        );
        rep.alpha_homomorphism = rep.alpha_homomorphism.max(r);

        rep.alpha_identity = rep.alpha_identity.max(d(&cm.alpha_matrix(&gid, &h1), &h1));

        let r = d(
            &cm.alpha_matrix(&(&g1 * &g2), &h1),
            &cm.alpha_matrix(&g1, &cm.alpha_matrix(&g2, &h1)),
        );
        rep.alpha_action = rep.alpha_action.max(r);

        let r = d(
            &cm.t_matrix(&cm.alpha_matrix(&g1, &h1)),
            &(&g1 * cm.t_matrix(&h1) * &g1inv),
        );
        rep.equivariance = rep.equivariance.max(r);

        let r = d(&cm.alpha_matrix(&cm.t_matrix(&h1), &h2), &(&h1 * &h2 * &h1inv));
        rep.peiffer = rep.peiffer.max(r);
    }
    rep
}

/// Maximum defect of the interchange law
/// `(ψ₁•ψ₂)∘(φ₁•φ₂) = (ψ₁∘φ₁)•(ψ₂∘φ₂)` over random composable quadruples.
pub fn verify_interchange(cm: &CrossedModule, n_quadruples: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..n_quadruples {
        let g1 = random_element(cm.g(), &mut rng, 2.0);
        let g2 = random_element(cm.g(), &mut rng, 2.0);
        let phi2 = TwoMorphismValue::new(cm, g1, random_element(cm.h(), &mut rng, 2.0));
        let phi1 = TwoMorphismValue::new(
            cm,
            phi2.target().clone(),
            random_element(cm.h(), &mut rng, 2.0),
        );
        let psi2 = TwoMorphismValue::new(cm, g2, random_element(cm.h(), &mut rng, 2.0));
        let psi1 = TwoMorphismValue::new(
            cm,
            psi2.target().clone(),
            random_element(cm.h(), &mut rng, 2.0),
        );
        let lhs = hcompose(cm, &vcompose(&psi1, &psi2)?, &vcompose(&phi1, &phi2)?);
        let rhs = vcompose(&hcompose(cm, &psi1, &phi1), &hcompose(cm, &psi2, &phi2))?;
        worst = worst
            .max(lhs.h().distance(rhs.h()))
            .max(lhs.source().distance(rhs.source()))
            .max(lhs.target().distance(rhs.target()));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_builtin() -> Vec<CrossedModule> {
        vec![
            make_eg(GroupDescriptor::su(2)),
            make_b_abelian(GroupDescriptor::u1()).unwrap(),
            make_aut_inner(GroupDescriptor::su(2)).unwrap(),
            make_eg(GroupDescriptor::upper_unipotent(3)),
        ]
    }

    #[test]
    fn builtin_axioms_hold() {
        for cm in all_builtin() {
            let rep = verify_axioms(&cm, 50, 7);
            assert!(rep.passes(1e-11), "{}: {:?}", cm.name(), rep);
        }
    }

    #[test]
    fn corrupted_action_fails_peiffer() {
        let g = GroupDescriptor::su(2);
        let cm = CrossedModule::custom(
            g,
            g,
            |h| h.clone(),
            |g, h| g.clone().try_inverse().unwrap() * h * g,
        );
        let rep = verify_axioms(&cm, 20, 3);
        assert!(rep.peiffer > 0.1);
    }

    #[test]
    fn custom_differentials_match_closed_forms() {
        let g = GroupDescriptor::su(2);
        let eg = make_eg(g);
        let custom = CrossedModule::custom(
            g,
            g,
            |h| h.clone(),
            |g, h| g * h * g.clone().try_inverse().unwrap(),
        );
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = AlgebraElement::from_coordinates(g, &[0.3, -0.5, 0.2]).unwrap();
        let y = AlgebraElement::from_coordinates(g, &[-0.1, 0.4, 0.7]).unwrap();
        let ge = random_element(&g, &mut rng, 1.0);
        let close = |a: CMat, b: CMat| (a - b).norm() < 1e-7;
        assert!(close(eg.t_star_matrix(y.matrix()), custom.t_star_matrix(y.matrix())));
        assert!(close(
            eg.alpha_star_matrix(x.matrix(), y.matrix()),
            custom.alpha_star_matrix(x.matrix(), y.matrix())
        ));
        assert!(close(
            eg.alpha_g_star_matrix(ge.matrix(), y.matrix()),
            custom.alpha_g_star_matrix(ge.matrix(), y.matrix())
        ));
        assert!(close(
            eg.alpha_h_star_matrix(ge.matrix(), x.matrix()),
            custom.alpha_h_star_matrix(ge.matrix(), x.matrix())
        ));
    }

    #[test]
    fn aut_inner_differentials_match_difference_quotients() {
        let cm = make_aut_inner(GroupDescriptor::su(2)).unwrap();
        let alpha = {
            let cm = cm.clone();
            move |g: &CMat, h: &CMat| cm.alpha_matrix(g, h)
        };
        let t = {
            let cm = cm.clone();
            move |h: &CMat| cm.t_matrix(h)
        };
        let numeric = CrossedModule::custom(*cm.g(), *cm.h(), t, alpha);
        let x = AlgebraElement::from_coordinates(*cm.g(), &[0.3, -0.5, 0.2]).unwrap();
        let y = AlgebraElement::from_coordinates(*cm.h(), &[-0.1, 0.4, 0.7]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let h = random_element(cm.h(), &mut rng, 1.0);
        let close = |a: CMat, b: CMat| (a - b).norm() < 1e-7;
        assert!(close(cm.t_star_matrix(y.matrix()), numeric.t_star_matrix(y.matrix())));
        assert!(close(
            cm.alpha_star_matrix(x.matrix(), y.matrix()),
            numeric.alpha_star_matrix(x.matrix(), y.matrix())
        ));
        assert!(close(
            cm.alpha_h_star_matrix(h.matrix(), x.matrix()),
            numeric.alpha_h_star_matrix(h.matrix(), x.matrix())
        ));
        // t lands in SO(3) and is two-to-one
        let r = cm.t(&h);
        assert!(r.membership_residual() < 1e-12);
        let minus = GroupElement::trusted(*cm.h(), -h.matrix());
        assert!(cm.t(&minus).distance(&r) < 1e-12);
    }

    #[test]
    fn interchange_law() {
        for cm in all_builtin() {
            assert!(verify_interchange(&cm, 30, 11).unwrap() < 1e-11, "{}", cm.name());
        }
    }

    #[test]
    fn eg_filler_is_unique() {
        let g = GroupDescriptor::su(2);
        let cm = make_eg(g);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = random_element(&g, &mut rng, 1.0);
        let b = random_element(&g, &mut rng, 1.0);
        let h = b.mul(&a.inverse());
        let v = TwoMorphismValue::new(&cm, a, h);
        assert!(v.target().distance(&b) < 1e-13);
    }

    #[test]
    fn mismatched_vertical_composition_is_rejected() {
        let g = GroupDescriptor::su(2);
        let cm = make_eg(g);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = TwoMorphismValue::new(&cm, random_element(&g, &mut rng, 1.0), random_element(&g, &mut rng, 1.0));
        let b = TwoMorphismValue::new(&cm, random_element(&g, &mut rng, 1.0), random_element(&g, &mut rng, 1.0));
        assert!(matches!(vcompose(&a, &b), Err(Error::Composition(_))));
    }

    #[test]
    fn parse_names() {
        assert_eq!(CrossedModule::parse("b_u1").unwrap().kind(), CrossedModuleKind::BAbelian);
        assert_eq!(CrossedModule::parse("eg:su2").unwrap().kind(), CrossedModuleKind::EG);
        assert_eq!(
            CrossedModule::parse("aut_inner:SU(2)").unwrap().kind(),
            CrossedModuleKind::AutInner
        );
        assert!(CrossedModule::parse("aut_inner:su3").is_err());
        assert!(CrossedModule::parse("b_su2").is_err());
    }
}
