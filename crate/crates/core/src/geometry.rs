//! Paths, bigons and loops in `ℝⁿ`, all carrying exact first derivatives.
//!
//! Paths have sitting instants: they are constant near both endpoints, so
//! that composites stay smooth. Bigons are maps `[0,1]² → ℝⁿ` with
//! `Σ(s, 0) = x`, `Σ(s, 1) = y`, constant in `s` near `s = 0, 1` and in `t`
//! near `t = 0, 1`. The bigon `Σ` goes from the source path `Σ(0, ·)` to the
//! target path `Σ(1, ·)`.

use std::fmt;
use std::sync::Arc;

use nalgebra::DVector;

use crate::error::{Error, Result};

pub type Point = DVector<f64>;

/// Nodes used to compare paths and bigon boundaries.
pub const COMPARISON_NODES: usize = 64;

/// Tolerance for the sampled path equality used by composition.
pub const PATH_EQUALITY_TOLERANCE: f64 = 1e-8;

/// Sitting-instant profile `β`: smooth, `0` on `(-∞, ε]`, `1` on `[1-ε, ∞)`
/// and strictly increasing in between. Built from `exp(-1/u)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SmoothingProfile {
    epsilon: f64,
}

impl Default for SmoothingProfile {
    fn default() -> Self {
        Self { epsilon: 0.1 }
    }
}

impl SmoothingProfile {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 0.5) {
            return Err(Error::domain(format!(
                "sitting width must lie in (0, 1/2), got {epsilon}"
            )));
        }
        Ok(Self { epsilon })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    fn inner(x: f64) -> (f64, f64) {
        if x <= 0.0 {
            return (0.0, 0.0);
        }
        if x >= 1.0 {
            return (1.0, 0.0);
        }
        let e = (1.0 / x - 1.0 / (1.0 - x)).exp();
        let psi = 1.0 / (1.0 + e);
        let dpsi = if e.is_finite() {
            psi * (1.0 - psi) * (1.0 / (x * x) + 1.0 / ((1.0 - x) * (1.0 - x)))
        } else {
            0.0
        };
        (psi, dpsi)
    }

    /// `(β(u), β'(u))`.
    pub fn eval(&self, u: f64) -> (f64, f64) {
        let w = 1.0 - 2.0 * self.epsilon;
        let (v, d) = Self::inner((u - self.epsilon) / w);
        (v, d / w)
    }

    pub fn value(&self, u: f64) -> f64 {
        self.eval(u).0
    }
}

/// An orientation preserving reparameterization `[0,1] → [0,1]` with its
/// derivative.
#[derive(Clone)]
pub struct Reparam {
    eval: Arc<dyn Fn(f64) -> (f64, f64) + Send + Sync>,
}

impl Reparam {
    pub fn new(f: impl Fn(f64) -> (f64, f64) + Send + Sync + 'static) -> Self {
        Self { eval: Arc::new(f) }
    }

    pub fn identity() -> Self {
        Self::new(|u| (u, 1.0))
    }

    pub fn profile(p: SmoothingProfile) -> Self {
        Self::new(move |u| p.eval(u))
    }

    pub fn eval(&self, u: f64) -> (f64, f64) {
        (self.eval)(u)
    }
}

type PathFn = dyn Fn(f64) -> (Point, Point) + Send + Sync;

/// A smooth path `[0,1] → ℝⁿ` returning position and velocity.
#[derive(Clone)]
pub struct Path {
    dim: usize,
    eval: Arc<PathFn>,
}

impl fmt::Debug for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Path")
            .field("dim", &self.dim)
            .field("start", &self.start().as_slice())
            .field("end", &self.end().as_slice())
            .finish()
    }
}

impl Path {
    /// `f(t)` returns `(γ(t), γ'(t))`.
    pub fn new(dim: usize, f: impl Fn(f64) -> (Point, Point) + Send + Sync + 'static) -> Self {
        Self {
            dim,
            eval: Arc::new(f),
        }
    }

    /// A path given by position only; velocities come from central
    /// differences with step `1e-6`.
    pub fn from_fn(dim: usize, f: impl Fn(f64) -> Point + Send + Sync + 'static) -> Self {
        let h = 1e-6;
        Self::new(dim, move |t| {
            let v = (f(t + h) - f(t - h)) / (2.0 * h);
            (f(t), v)
        })
    }

    pub fn constant(x: Point) -> Self {
        let dim = x.len();
        Self::new(dim, move |_| (x.clone(), Point::zeros(dim)))
    }

    /// Straight segment from `a` to `b` traversed with the default profile.
    pub fn line(a: Point, b: Point) -> Self {
        Self::line_with_profile(a, b, SmoothingProfile::default())
    }

    pub fn line_with_profile(a: Point, b: Point, profile: SmoothingProfile) -> Self {
        let dim = a.len();
        let d = &b - &a;
        Self::new(dim, move |t| {
            let (u, du) = profile.eval(t);
            (&a + &d * u, &d * du)
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn jet(&self, t: f64) -> (Point, Point) {
        (self.eval)(t)
    }

    pub fn point(&self, t: f64) -> Point {
        (self.eval)(t).0
    }

    pub fn velocity(&self, t: f64) -> Point {
        (self.eval)(t).1
    }

    pub fn start(&self) -> Point {
        self.point(0.0)
    }

    pub fn end(&self) -> Point {
        self.point(1.0)
    }

    /// Sup-distance over the comparison nodes.
    pub fn sup_distance(&self, other: &Path) -> f64 {
        comparison_nodes()
            .map(|t| (self.point(t) - other.point(t)).amax())
            .fold(0.0, f64::max)
    }
}

fn comparison_nodes() -> impl Iterator<Item = f64> {
    (0..COMPARISON_NODES).map(|k| {
        0.5 * (1.0 - (std::f64::consts::PI * (k as f64 + 0.5) / COMPARISON_NODES as f64).cos())
    })
}

/// `γ₂ ∘ γ₁`: first `first`, then `second`.
pub fn path_compose(first: &Path, second: &Path) -> Result<Path> {
    if first.dim != second.dim {
        return Err(Error::composition("paths live in different dimensions"));
    }
    let gap = (first.end() - second.start()).amax();
    if gap > PATH_EQUALITY_TOLERANCE {
        return Err(Error::composition(format!(
            "end point of the first path differs from the start of the second by {gap:.3e}"
        )));
    }
    let (a, b) = (first.clone(), second.clone());
    Ok(Path::new(first.dim, move |t| {
        if t < 0.5 {
            let (x, v) = a.jet(2.0 * t);
            (x, v * 2.0)
        } else {
            let (x, v) = b.jet(2.0 * t - 1.0);
            (x, v * 2.0)
        }
    }))
}

pub fn path_reverse(path: &Path) -> Path {
    let p = path.clone();
    Path::new(path.dim, move |t| {
        let (x, v) = p.jet(1.0 - t);
        (x, -v)
    })
}

pub fn reparameterize(path: &Path, r: &Reparam) -> Path {
    let (p, r) = (path.clone(), r.clone());
    Path::new(path.dim, move |t| {
        let (u, du) = r.eval(t);
        let (x, v) = p.jet(u);
        (x, v * du)
    })
}

/// Position and both partial derivatives of a bigon or surface map.
#[derive(Clone, Debug)]
pub struct BigonJet {
    pub point: Point,
    pub ds: Point,
    pub dt: Point,
}

type SurfaceFn = dyn Fn(f64, f64) -> BigonJet + Send + Sync;

/// A smooth map `ℝ² → ℝⁿ` with its Jacobian, used to push the standard
/// bigon forward.
#[derive(Clone)]
pub struct SurfaceMap {
    dim: usize,
    eval: Arc<SurfaceFn>,
}

impl SurfaceMap {
    pub fn new(dim: usize, f: impl Fn(f64, f64) -> BigonJet + Send + Sync + 'static) -> Self {
        Self {
            dim,
            eval: Arc::new(f),
        }
    }

    /// `Γ(s, t) = x + s·v₁ + t·v₂`.
    pub fn plane(x: Point, v1: Point, v2: Point) -> Self {
        let dim = x.len();
        Self::new(dim, move |s, t| BigonJet {
            point: &x + &v1 * s + &v2 * t,
            ds: v1.clone(),
            dt: v2.clone(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn jet(&self, s: f64, t: f64) -> BigonJet {
        (self.eval)(s, t)
    }
}

/// A bigon `[0,1]² → ℝⁿ`.
#[derive(Clone)]
pub struct Bigon {
    dim: usize,
    eval: Arc<SurfaceFn>,
}

impl fmt::Debug for Bigon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Bigon").field("dim", &self.dim).finish()
    }
}

impl Bigon {
    pub fn new(dim: usize, f: impl Fn(f64, f64) -> BigonJet + Send + Sync + 'static) -> Self {
        Self {
            dim,
            eval: Arc::new(f),
        }
    }

    /// A bigon given by position only; partials by central differences.
    pub fn from_fn(dim: usize, f: impl Fn(f64, f64) -> Point + Send + Sync + 'static) -> Self {
        let h = 1e-6;
        Self::new(dim, move |s, t| BigonJet {
            point: f(s, t),
            ds: (f(s + h, t) - f(s - h, t)) / (2.0 * h),
            dt: (f(s, t + h) - f(s, t - h)) / (2.0 * h),
        })
    }

    /// The identity bigon `Σ(s, t) = γ(t)`.
    pub fn identity(path: &Path) -> Self {
        let p = path.clone();
        let dim = path.dim;
        Self::new(dim, move |_, t| {
            let (x, v) = p.jet(t);
            BigonJet {
                point: x,
                ds: Point::zeros(dim),
                dt: v,
            }
        })
    }

    /// The straight-line homotopy `Σ(s, t) = (1-β(s))·γ₀(t) + β(s)·γ₁(t)`
    /// between two paths with common endpoints.
    pub fn straight_homotopy(source: &Path, target: &Path, profile: SmoothingProfile) -> Result<Self> {
        if (source.start() - target.start()).amax() > PATH_EQUALITY_TOLERANCE
            || (source.end() - target.end()).amax() > PATH_EQUALITY_TOLERANCE
        {
            return Err(Error::composition("paths do not share endpoints"));
        }
        let (a, b) = (source.clone(), target.clone());
        Ok(Self::new(source.dim, move |s, t| {
            let (l, dl) = profile.eval(s);
            let (xa, va) = a.jet(t);
            let (xb, vb) = b.jet(t);
            BigonJet {
                ds: (&xb - &xa) * dl,
                point: &xa * (1.0 - l) + &xb * l,
                dt: va * (1.0 - l) + vb * l,
            }
        }))
    }

    /// Radial contraction `Σ(s, t) = x + β(s)(γ(t) - x)` of a closed path
    /// `γ` based at `x`; a bigon from the constant path to `γ`.
    pub fn contraction(closed: &Path, profile: SmoothingProfile) -> Result<Self> {
        let x = closed.start();
        if (closed.end() - &x).amax() > PATH_EQUALITY_TOLERANCE {
            return Err(Error::domain("contraction needs a closed path"));
        }
        let p = closed.clone();
        Ok(Self::new(closed.dim, move |s, t| {
            let (l, dl) = profile.eval(s);
            let (y, v) = p.jet(t);
            let d = &y - &x;
            BigonJet {
                point: &x + &d * l,
                ds: d * dl,
                dt: v * l,
            }
        }))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn jet(&self, s: f64, t: f64) -> BigonJet {
        (self.eval)(s, t)
    }

    pub fn point(&self, s: f64, t: f64) -> Point {
        (self.eval)(s, t).point
    }

    pub fn source(&self) -> Path {
        let b = self.clone();
        Path::new(self.dim, move |t| {
            let j = b.jet(0.0, t);
            (j.point, j.dt)
        })
    }

    pub fn target(&self) -> Path {
        let b = self.clone();
        Path::new(self.dim, move |t| {
            let j = b.jet(1.0, t);
            (j.point, j.dt)
        })
    }

    /// Largest deviation of `Σ(s, 0)` and `Σ(s, 1)` from the endpoints.
    pub fn endpoint_defect(&self) -> f64 {
        let x = self.point(0.0, 0.0);
        let y = self.point(0.0, 1.0);
        comparison_nodes()
            .map(|s| {
                (self.point(s, 0.0) - &x)
                    .amax()
                    .max((self.point(s, 1.0) - &y).amax())
            })
            .fold(0.0, f64::max)
    }

    /// `Σ(r_s(s), r_t(t))`.
    pub fn reparameterize(&self, rs: &Reparam, rt: &Reparam) -> Bigon {
        let (b, rs, rt) = (self.clone(), rs.clone(), rt.clone());
        Bigon::new(self.dim, move |s, t| {
            let (u, du) = rs.eval(s);
            let (w, dw) = rt.eval(t);
            let j = b.jet(u, w);
            BigonJet {
                point: j.point,
                ds: j.ds * du,
                dt: j.dt * dw,
            }
        })
    }
}

/// Vertical composite: first `first : γ₀ ⇒ γ₁`, then `second : γ₁ ⇒ γ₂`.
pub fn bigon_vcompose(first: &Bigon, second: &Bigon) -> Result<Bigon> {
    if first.dim != second.dim {
        return Err(Error::composition("bigons live in different dimensions"));
    }
    let gap = first.target().sup_distance(&second.source());
    if gap > PATH_EQUALITY_TOLERANCE {
        return Err(Error::composition(format!(
            "target of the first bigon differs from the source of the second by {gap:.3e}"
        )));
    }
    let (a, b) = (first.clone(), second.clone());
    Ok(Bigon::new(first.dim, move |s, t| {
        let j = if s < 0.5 { a.jet(2.0 * s, t) } else { b.jet(2.0 * s - 1.0, t) };
        BigonJet {
            point: j.point,
            ds: j.ds * 2.0,
            dt: j.dt,
        }
    }))
}

/// Horizontal composite: `first` between paths `x → y`, then `second`
/// between paths `y → z`.
pub fn bigon_hcompose(first: &Bigon, second: &Bigon) -> Result<Bigon> {
    if first.dim != second.dim {
        return Err(Error::composition("bigons live in different dimensions"));
    }
    let gap = (first.point(0.0, 1.0) - second.point(0.0, 0.0)).amax();
    if gap > PATH_EQUALITY_TOLERANCE {
        return Err(Error::composition(format!(
            "end point of the first bigon differs from the start of the second by {gap:.3e}"
        )));
    }
    let (a, b) = (first.clone(), second.clone());
    Ok(Bigon::new(first.dim, move |s, t| {
        let j = if t < 0.5 { a.jet(s, 2.0 * t) } else { b.jet(s, 2.0 * t - 1.0) };
        BigonJet {
            point: j.point,
            ds: j.ds,
            dt: j.dt * 2.0,
        }
    }))
}

/// The standard bigon `Σ_R(s, t)` pushed forward along `Γ`.
///
/// It goes from the path `(0,0) → (0,t) → (s,t)` to the path
/// `(0,0) → (s,0) → (s,t)` in the `(s, t)` plane, each leg taking half of
/// the parameter interval. Intermediate paths blend the two legs with the
/// sitting profile in `σ`. For `s = 0` or `t = 0` it is thin.
pub fn standard_bigon(gamma: &SurfaceMap, s: f64, t: f64) -> Bigon {
    standard_bigon_with_profile(gamma, s, t, SmoothingProfile::default())
}

pub fn standard_bigon_with_profile(
    gamma: &SurfaceMap,
    s: f64,
    t: f64,
    profile: SmoothingProfile,
) -> Bigon {
    let g = gamma.clone();
    Bigon::new(gamma.dim, move |sigma, tau| {
        let (l, dl) = profile.eval(sigma);
        let (b1, d1) = profile.eval(2.0 * tau);
        let (b2, d2) = profile.eval(2.0 * tau - 1.0);
        let u = s * (l * b1 + (1.0 - l) * b2);
        let w = t * (l * b2 + (1.0 - l) * b1);
        let du_dsigma = s * dl * (b1 - b2);
        let dw_dsigma = t * dl * (b2 - b1);
        let du_dtau = 2.0 * s * (l * d1 + (1.0 - l) * d2);
        let dw_dtau = 2.0 * t * (l * d2 + (1.0 - l) * d1);
        let j = g.jet(u, w);
        BigonJet {
            ds: &j.ds * du_dsigma + &j.dt * dw_dsigma,
            dt: &j.ds * du_dtau + &j.dt * dw_dtau,
            point: j.point,
        }
    })
}

type LoopFn = dyn Fn(f64) -> (Point, Point) + Send + Sync;

/// A smooth loop `z ↦ τ(e^{2πiz})`, `z ∈ [0, 1]`, with `d/dz`. The base
/// point is `τ(1)`, i.e. `z = 0`.
#[derive(Clone)]
pub struct Loop {
    dim: usize,
    eval: Arc<LoopFn>,
}

impl fmt::Debug for Loop {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Loop")
            .field("dim", &self.dim)
            .field("base", &self.base_point().as_slice())
            .finish()
    }
}

impl Loop {
    pub fn new(dim: usize, f: impl Fn(f64) -> (Point, Point) + Send + Sync + 'static) -> Self {
        Self {
            dim,
            eval: Arc::new(f),
        }
    }

    /// Circle `c + r(cos 2πz·e₁ + sin 2πz·e₂)`.
    pub fn circle(center: Point, radius: f64, e1: Point, e2: Point) -> Self {
        let dim = center.len();
        let tau = 2.0 * std::f64::consts::PI;
        Self::new(dim, move |z| {
            let (s, c) = (tau * z).sin_cos();
            (
                &center + &e1 * (radius * c) + &e2 * (radius * s),
                (&e2 * c - &e1 * s) * (radius * tau),
            )
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn jet(&self, z: f64) -> (Point, Point) {
        (self.eval)(z)
    }

    pub fn point(&self, z: f64) -> Point {
        (self.eval)(z).0
    }

    pub fn base_point(&self) -> Point {
        self.point(0.0)
    }

    /// Rigid rotation `z ↦ z + shift`.
    pub fn rotate(&self, shift: f64) -> Loop {
        let l = self.clone();
        Loop::new(self.dim, move |z| l.jet(z + shift))
    }

    /// Periodicity defect `|τ(0) - τ(1)|`.
    pub fn closure_defect(&self) -> f64 {
        (self.point(0.0) - self.point(1.0)).amax()
    }
}

/// The path `t ↦ τ(e^{2πiβ(t)})` at the base point.
pub fn loop_to_path(l: &Loop, profile: SmoothingProfile) -> Path {
    let l = l.clone();
    Path::new(l.dim, move |t| {
        let (u, du) = profile.eval(t);
        let (x, v) = l.jet(u);
        (x, v * du)
    })
}
