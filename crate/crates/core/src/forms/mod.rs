//! Lie algebra valued differential forms on `ℝⁿ` and connection pairs.
//!
//! Forms are stored by coordinate components. A component is either a
//! matrix of [`expr::Expr`] (exact derivatives) or a native closure
//! (central differences).

pub mod expr;

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::higher_group::CrossedModule;
use crate::lie_core::{
    commutator, maurer_cartan_right, AlgebraElement, CMat, GroupCurve, GroupDescriptor, GroupElement, C64,
};
use crate::quadrature::halton_in_box;

pub use expr::{Expr, ExprMatrix};

/// Default step for central differences of native fields.
pub const DEFAULT_FD_STEP: f64 = 1e-5;
/// Fake curvature tolerance when all derivatives are symbolic.
pub const FC_TOLERANCE_SYMBOLIC: f64 = 1e-5;
/// Fake curvature tolerance when derivatives come from differences.
pub const FC_TOLERANCE_FD: f64 = 1e-3;
/// Sample count for the fake curvature gate.
pub const FC_SAMPLES: usize = 256;

/// Names `x1 … xn` of the ambient coordinates.
pub fn ambient_vars(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("x{i}")).collect()
}

type NativeFn = dyn Fn(&[f64]) -> CMat + Send + Sync;

/// A matrix valued function on `ℝⁿ`.
#[derive(Clone)]
pub enum MatrixField {
    Symbolic {
        value: ExprMatrix,
        partials: Vec<ExprMatrix>,
    },
    Native {
        rows: usize,
        eval: Arc<NativeFn>,
        fd_step: f64,
    },
}

impl fmt::Debug for MatrixField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MatrixField::Symbolic { value, .. } => f.debug_tuple("Symbolic").field(value).finish(),
            MatrixField::Native { rows, .. } => f.debug_struct("Native").field("rows", rows).finish(),
        }
    }
}

impl MatrixField {
    /// Symbolic field in `n` ambient variables.
    pub fn symbolic(value: ExprMatrix, n: usize) -> Self {
        let partials = (0..n).map(|i| value.diff(i)).collect();
        MatrixField::Symbolic { value, partials }
    }

    pub fn native(rows: usize, f: impl Fn(&[f64]) -> CMat + Send + Sync + 'static) -> Self {
        MatrixField::Native {
            rows,
            eval: Arc::new(f),
            fd_step: DEFAULT_FD_STEP,
        }
    }

    /// Sets the difference step of a native field; symbolic fields ignore it.
    pub fn with_fd_step(self, step: f64) -> Self {
        match self {
            MatrixField::Native { rows, eval, .. } => MatrixField::Native {
                rows,
                eval,
                fd_step: step,
            },
            s => s,
        }
    }

    pub fn zero(rows: usize, n: usize) -> Self {
        Self::symbolic(ExprMatrix::zeros(rows, rows), n)
    }

    pub fn is_symbolic(&self) -> bool {
        matches!(self, MatrixField::Symbolic { .. })
    }

    pub fn rows(&self) -> usize {
        match self {
            MatrixField::Symbolic { value, .. } => value.rows(),
            MatrixField::Native { rows, .. } => *rows,
        }
    }

    pub fn as_expr(&self) -> Option<&ExprMatrix> {
        match self {
            MatrixField::Symbolic { value, .. } => Some(value),
            MatrixField::Native { .. } => None,
        }
    }

    pub fn eval(&self, x: &[f64]) -> CMat {
        match self {
            MatrixField::Symbolic { value, .. } => value.eval(x),
            MatrixField::Native { eval, .. } => eval(x),
        }
    }

    /// `∂ᵢ` of the field at `x`.
    pub fn partial(&self, x: &[f64], i: usize) -> CMat {
        match self {
            MatrixField::Symbolic { partials, .. } => partials[i].eval(x),
            MatrixField::Native { eval, fd_step, .. } => {
                let mut xp = x.to_vec();
                let mut xm = x.to_vec();
                xp[i] += fd_step;
                xm[i] -= fd_step;
                (eval(&xp) - eval(&xm)) * C64::new(0.5 / fd_step, 0.0)
            }
        }
    }

    /// `self + c·other`, symbolic when both summands are.
    pub fn add_scaled(&self, other: &MatrixField, c: f64, n: usize) -> MatrixField {
        match (self, other) {
            (MatrixField::Symbolic { value: a, .. }, MatrixField::Symbolic { value: b, .. }) => {
                MatrixField::symbolic(a.add(&b.scale(&Expr::real(c))), n)
            }
            _ => {
                let (a, b) = (self.clone(), other.clone());
                MatrixField::native(self.rows(), move |x| a.eval(x) + b.eval(x) * C64::new(c, 0.0))
            }
        }
    }
}

fn check_membership(
    descriptor: &GroupDescriptor,
    n: usize,
    components: &[MatrixField],
    what: &str,
) -> Result<()> {
    for (k, c) in components.iter().enumerate() {
        if c.rows() != descriptor.dim() {
            return Err(Error::domain(format!(
                "{what} component {k} has size {} but {} needs {}",
                c.rows(),
                descriptor.name(),
                descriptor.dim()
            )));
        }
    }
    let bounds = vec![(0.0, 1.0); n];
    for x in halton_in_box(&bounds, 8, 0, 0.0) {
        for (k, c) in components.iter().enumerate() {
            let m = c.eval(&x);
            let r = descriptor.algebra_residual(&m);
            if !(r <= 1e-9 * m.norm().max(1.0)) {
                return Err(Error::domain(format!(
                    "{what} component {k} is not {}-valued at {x:?} (residual {r:.3e})",
                    descriptor.name()
                )));
            }
        }
    }
    Ok(())
}

/// A Lie algebra valued 1-form `Σ Aᵢ dxⁱ`.
#[derive(Clone, Debug)]
pub struct OneFormField {
    descriptor: GroupDescriptor,
    components: Vec<MatrixField>,
}

impl OneFormField {
    /// Validates shapes and algebra membership at sample points of `[0,1]ⁿ`.
    pub fn new(descriptor: GroupDescriptor, components: Vec<MatrixField>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::domain("a 1-form needs at least one component"));
        }
        check_membership(&descriptor, components.len(), &components, "1-form")?;
        Ok(Self {
            descriptor,
            components,
        })
    }

    /// Parses one expression matrix per `dxⁱ` in the variables `x1 … xn`.
    pub fn from_exprs<S: AsRef<str>>(
        descriptor: GroupDescriptor,
        components: &[Vec<Vec<S>>],
    ) -> Result<Self> {
        let n = components.len();
        let names = ambient_vars(n);
        let vars: Vec<&str> = names.iter().map(String::as_str).collect();
        let fields = components
            .iter()
            .map(|m| Ok(MatrixField::symbolic(ExprMatrix::parse(m, &vars)?, n)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(descriptor, fields)
    }

    pub fn zero(descriptor: GroupDescriptor, n: usize) -> Self {
        Self {
            descriptor,
            components: (0..n).map(|_| MatrixField::zero(descriptor.dim(), n)).collect(),
        }
    }

    pub fn descriptor(&self) -> &GroupDescriptor {
        &self.descriptor
    }

    pub fn ambient_dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[MatrixField] {
        &self.components
    }

    pub fn is_symbolic(&self) -> bool {
        self.components.iter().all(MatrixField::is_symbolic)
    }

    /// `A_x(v)` as a matrix.
    pub fn eval_matrix(&self, x: &[f64], v: &[f64]) -> CMat {
        let d = self.descriptor.dim();
        let mut out = CMat::zeros(d, d);
        for (c, vi) in self.components.iter().zip(v) {
            if *vi != 0.0 {
                out += c.eval(x) * C64::new(*vi, 0.0);
            }
        }
        out
    }

    pub fn eval(&self, x: &[f64], v: &[f64]) -> AlgebraElement {
        AlgebraElement::trusted(self.descriptor, self.eval_matrix(x, v))
    }

    /// `self + c·other`.
    pub fn add_scaled(&self, other: &OneFormField, c: f64) -> Result<OneFormField> {
        if self.ambient_dim() != other.ambient_dim() || self.descriptor.family() != other.descriptor.family() {
            return Err(Error::domain("1-forms of different shapes"));
        }
        let n = self.ambient_dim();
        Ok(Self {
            descriptor: self.descriptor,
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a.add_scaled(b, c, n))
                .collect(),
        })
    }

    /// Curvature `Kᵢⱼ = ∂ᵢAⱼ - ∂ⱼAᵢ + [Aᵢ, Aⱼ]` at `x`.
    pub fn curvature_component(&self, x: &[f64], i: usize, j: usize) -> CMat {
        let a = &self.components;
        a[j].partial(x, i) - a[i].partial(x, j) + commutator(&a[i].eval(x), &a[j].eval(x))
    }
}

/// A smooth map `ℝⁿ → G`, the 0-form part of a transformation.
#[derive(Clone, Debug)]
pub struct GroupField {
    descriptor: GroupDescriptor,
    n: usize,
    field: MatrixField,
}

impl GroupField {
    /// Validates group membership at sample points of `[0,1]ⁿ`.
    pub fn new(descriptor: GroupDescriptor, n: usize, field: MatrixField) -> Result<Self> {
        if field.rows() != descriptor.dim() {
            return Err(Error::domain(format!(
                "group field has size {} but {} needs {}",
                field.rows(),
                descriptor.name(),
                descriptor.dim()
            )));
        }
        let bounds = vec![(0.0, 1.0); n];
        for x in halton_in_box(&bounds, 8, 0, 0.0) {
            let r = descriptor.group_residual(&field.eval(&x));
            if !(r <= 1e-9) {
                return Err(Error::domain(format!(
                    "group field leaves {} at {x:?} (residual {r:.3e})",
                    descriptor.name()
                )));
            }
        }
        Ok(Self { descriptor, n, field })
    }

    pub fn from_exprs<S: AsRef<str>>(descriptor: GroupDescriptor, n: usize, rows: &[Vec<S>]) -> Result<Self> {
        let names = ambient_vars(n);
        let vars: Vec<&str> = names.iter().map(String::as_str).collect();
        Self::new(descriptor, n, MatrixField::symbolic(ExprMatrix::parse(rows, &vars)?, n))
    }

    pub fn constant(g: &GroupElement, n: usize) -> Self {
        Self {
            descriptor: *g.descriptor(),
            n,
            field: MatrixField::symbolic(ExprMatrix::constant(g.matrix()), n),
        }
    }

    pub fn descriptor(&self) -> &GroupDescriptor {
        &self.descriptor
    }

    pub fn ambient_dim(&self) -> usize {
        self.n
    }

    pub fn field(&self) -> &MatrixField {
        &self.field
    }

    pub fn eval_matrix(&self, x: &[f64]) -> CMat {
        self.field.eval(x)
    }

    pub fn eval(&self, x: &[f64]) -> GroupElement {
        GroupElement::trusted(self.descriptor, self.field.eval(x))
    }

    /// Pullback of the right Maurer-Cartan form, `dg(v)·g⁻¹`, along the
    /// curve `τ ↦ g(x + τv)`. Symbolic fields are differentiated exactly.
    pub fn right_maurer_cartan(&self, x: &[f64], v: &[f64], fd_step: f64) -> Result<AlgebraElement> {
        if self.field.is_symbolic() {
            let d = self.descriptor.dim();
            let mut dg = CMat::zeros(d, d);
            for (i, vi) in v.iter().enumerate() {
                if *vi != 0.0 {
                    dg += self.field.partial(x, i) * C64::new(*vi, 0.0);
                }
            }
            let ginv = self.descriptor.invert(&self.field.eval(x))?;
            return Ok(AlgebraElement::projected(self.descriptor, &(dg * ginv)));
        }
        let (x0, v0, f) = (x.to_vec(), v.to_vec(), self.field.clone());
        let curve_fn = move |t: f64| {
            let p: Vec<f64> = x0.iter().zip(&v0).map(|(a, b)| a + t * b).collect();
            f.eval(&p)
        };
        let curve = GroupCurve::new(self.descriptor, (-1.0, 1.0), &curve_fn);
        maurer_cartan_right(&curve, 0.0, fd_step)
    }
}

/// Index of the pair `(i, j)`, `i < j`, in lexicographic order.
pub fn pair_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * n - i * (i + 1) / 2 + (j - i - 1)
}

/// All pairs `(i, j)` with `i < j < n`.
pub fn pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).collect()
}

/// A Lie algebra valued 2-form `Σ_{i<j} Bᵢⱼ dxⁱ∧dxʲ`.
#[derive(Clone, Debug)]
pub struct TwoFormField {
    descriptor: GroupDescriptor,
    n: usize,
    components: Vec<MatrixField>,
}

impl TwoFormField {
    /// `components` are indexed by [`pair_index`].
    pub fn new(descriptor: GroupDescriptor, n: usize, components: Vec<MatrixField>) -> Result<Self> {
        if components.len() != n * (n.saturating_sub(1)) / 2 {
            return Err(Error::domain(format!(
                "a 2-form on R^{n} has {} components, got {}",
                n * (n.saturating_sub(1)) / 2,
                components.len()
            )));
        }
        check_membership(&descriptor, n, &components, "2-form")?;
        Ok(Self {
            descriptor,
            n,
            components,
        })
    }

    /// Parses `(i, j) ↦ expression matrix` with 1-based indices; missing
    /// components are zero and `(j, i)` entries are negated.
    pub fn from_exprs<S: AsRef<str>>(
        descriptor: GroupDescriptor,
        n: usize,
        entries: &[((usize, usize), Vec<Vec<S>>)],
    ) -> Result<Self> {
        let names = ambient_vars(n);
        let vars: Vec<&str> = names.iter().map(String::as_str).collect();
        let d = descriptor.dim();
        let mut comps: Vec<ExprMatrix> = vec![ExprMatrix::zeros(d, d); n * (n.saturating_sub(1)) / 2];
        for ((i, j), m) in entries {
            let (i, j) = (*i, *j);
            if i == 0 || j == 0 || i > n || j > n || i == j {
                return Err(Error::domain(format!("invalid 2-form index ({i}, {j})")));
            }
            let parsed = ExprMatrix::parse(m, &vars)?;
            let (a, b, sign) = if i < j { (i, j, 1.0) } else { (j, i, -1.0) };
            let k = pair_index(n, a - 1, b - 1);
            comps[k] = comps[k].add(&parsed.scale(&Expr::real(sign)));
        }
        Self::new(
            descriptor,
            n,
            comps.into_iter().map(|m| MatrixField::symbolic(m, n)).collect(),
        )
    }

    pub fn zero(descriptor: GroupDescriptor, n: usize) -> Self {
        Self {
            descriptor,
            n,
            components: (0..n * (n.saturating_sub(1)) / 2)
                .map(|_| MatrixField::zero(descriptor.dim(), n))
                .collect(),
        }
    }

    /// The curvature `dA + [A∧A]`; symbolic when `A` is.
    pub fn curvature_of(a: &OneFormField) -> TwoFormField {
        let n = a.ambient_dim();
        let d = *a.descriptor();
        let comps = pairs(n)
            .into_iter()
            .map(|(i, j)| {
                match (a.components[i].as_expr(), a.components[j].as_expr()) {
                    (Some(ai), Some(aj)) => {
                        MatrixField::symbolic(aj.diff(i).sub(&ai.diff(j)).add(&ai.commutator(aj)), n)
                    }
                    _ => {
                        let a = a.clone();
                        MatrixField::native(d.dim(), move |x| a.curvature_component(x, i, j))
                    }
                }
            })
            .collect();
        Self {
            descriptor: d,
            n,
            components: comps,
        }
    }

    pub fn descriptor(&self) -> &GroupDescriptor {
        &self.descriptor
    }

    pub fn ambient_dim(&self) -> usize {
        self.n
    }

    pub fn components(&self) -> &[MatrixField] {
        &self.components
    }

    pub fn is_symbolic(&self) -> bool {
        self.components.iter().all(MatrixField::is_symbolic)
    }

    /// `Bᵢⱼ(x)` for any `i ≠ j`.
    pub fn component(&self, x: &[f64], i: usize, j: usize) -> CMat {
        match i.cmp(&j) {
            std::cmp::Ordering::Less => self.components[pair_index(self.n, i, j)].eval(x),
            std::cmp::Ordering::Greater => -self.components[pair_index(self.n, j, i)].eval(x),
            std::cmp::Ordering::Equal => CMat::zeros(self.descriptor.dim(), self.descriptor.dim()),
        }
    }

    /// `B_x(v₁, v₂)` as a matrix.
    pub fn eval_matrix(&self, x: &[f64], v1: &[f64], v2: &[f64]) -> CMat {
        let d = self.descriptor.dim();
        let mut out = CMat::zeros(d, d);
        for (k, (i, j)) in pairs(self.n).into_iter().enumerate() {
            let c = v1[i] * v2[j] - v1[j] * v2[i];
            if c != 0.0 {
                out += self.components[k].eval(x) * C64::new(c, 0.0);
            }
        }
        out
    }

    pub fn eval(&self, x: &[f64], v1: &[f64], v2: &[f64]) -> AlgebraElement {
        AlgebraElement::trusted(self.descriptor, self.eval_matrix(x, v1, v2))
    }

    /// `self + c·other`.
    pub fn add_scaled(&self, other: &TwoFormField, c: f64) -> Result<TwoFormField> {
        if self.n != other.n || self.descriptor.family() != other.descriptor.family() {
            return Err(Error::domain("2-forms of different shapes"));
        }
        Ok(Self {
            descriptor: self.descriptor,
            n: self.n,
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a.add_scaled(b, c, self.n))
                .collect(),
        })
    }

    /// `(dB)ᵢⱼₖ` at `x` for `i < j < k`.
    pub fn exterior_derivative_component(&self, x: &[f64], i: usize, j: usize, k: usize) -> CMat {
        let p = |a: usize, b: usize, c: usize| self.components[pair_index(self.n, a, b)].partial(x, c);
        p(j, k, i) - p(i, k, j) + p(i, j, k)
    }
}

/// `K_A(v₁, v₂) = dA(v₁, v₂) + [A(v₁), A(v₂)]`.
pub fn curvature_two_form(a: &OneFormField, x: &[f64], v1: &[f64], v2: &[f64]) -> AlgebraElement {
    let n = a.ambient_dim();
    let d = a.descriptor().dim();
    let mut out = CMat::zeros(d, d);
    for (i, j) in pairs(n) {
        let c = v1[i] * v2[j] - v1[j] * v2[i];
        if c != 0.0 {
            out += a.curvature_component(x, i, j) * C64::new(c, 0.0);
        }
    }
    AlgebraElement::trusted(*a.descriptor(), out)
}

/// Fake curvature `K_A(v₁, v₂) - t_*(B(v₁, v₂))`.
pub fn fake_curvature(
    cm: &CrossedModule,
    a: &OneFormField,
    b: &TwoFormField,
    x: &[f64],
    v1: &[f64],
    v2: &[f64],
) -> AlgebraElement {
    let k = curvature_two_form(a, x, v1, v2);
    let tb = cm.t_star_matrix(&b.eval_matrix(x, v1, v2));
    AlgebraElement::trusted(*cm.g(), k.matrix() - tb)
}

/// `α_*(A ∧ φ)(v₁, v₂) = α_*(A(v₁), φ(v₂)) - α_*(A(v₂), φ(v₁))`.
pub fn alpha_wedge(
    cm: &CrossedModule,
    a: &OneFormField,
    phi: &OneFormField,
    x: &[f64],
    v1: &[f64],
    v2: &[f64],
) -> AlgebraElement {
    let a1 = a.eval_matrix(x, v1);
    let a2 = a.eval_matrix(x, v2);
    let p1 = phi.eval_matrix(x, v1);
    let p2 = phi.eval_matrix(x, v2);
    AlgebraElement::trusted(
        *cm.h(),
        cm.alpha_star_matrix(&a1, &p2) - cm.alpha_star_matrix(&a2, &p1),
    )
}

/// Components `(dB + α_*(A∧B))ᵢⱼₖ`, `i < j < k`, of the curvature 3-form.
pub fn curvature_three_form(cm: &CrossedModule, a: &OneFormField, b: &TwoFormField, x: &[f64]) -> Vec<CMat> {
    let n = a.ambient_dim();
    let mut out = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            for k in (j + 1)..n {
                let ai = a.components()[i].eval(x);
                let aj = a.components()[j].eval(x);
                let ak = a.components()[k].eval(x);
                let wedge = cm.alpha_star_matrix(&ai, &b.component(x, j, k))
                    - cm.alpha_star_matrix(&aj, &b.component(x, i, k))
                    + cm.alpha_star_matrix(&ak, &b.component(x, i, j));
                out.push(b.exterior_derivative_component(x, i, j, k) + wedge);
            }
        }
    }
    out
}

/// Result of sampling the fake curvature over a box.
#[derive(Clone, Debug)]
pub struct FakeCurvatureReport {
    pub max_residual: f64,
    pub argmax: Vec<f64>,
    pub samples: usize,
    pub seed: u64,
    pub symbolic: bool,
    pub tolerance: f64,
}

impl FakeCurvatureReport {
    pub fn passes(&self) -> bool {
        self.max_residual <= self.tolerance
    }
}

/// Maximum of `‖K_A - t_*B‖` over all coordinate planes at `n_samples`
/// low-discrepancy points of `bounds`.
pub fn fake_curvature_residual(
    cm: &CrossedModule,
    a: &OneFormField,
    b: &TwoFormField,
    bounds: &[(f64, f64)],
    n_samples: usize,
    seed: u64,
) -> FakeCurvatureReport {
    let n = a.ambient_dim();
    let symbolic = a.is_symbolic() && b.is_symbolic();
    let mut worst = 0.0f64;
    let mut argmax = vec![0.0; n];
    for x in halton_in_box(bounds, n_samples, seed, 0.0) {
        for (k, (i, j)) in pairs(n).into_iter().enumerate() {
            let r = (a.curvature_component(&x, i, j) - cm.t_star_matrix(&b.components()[k].eval(&x))).norm();
            if !(r <= worst) {
                worst = if r.is_nan() { f64::INFINITY } else { r };
                argmax = x.clone();
            }
        }
    }
    FakeCurvatureReport {
        max_residual: worst,
        argmax,
        samples: n_samples,
        seed,
        symbolic,
        tolerance: if symbolic {
            FC_TOLERANCE_SYMBOLIC
        } else {
            FC_TOLERANCE_FD
        },
    }
}

/// Options for [`ConnectionPair::with_options`].
#[derive(Clone, Debug)]
pub struct PairOptions {
    /// Box on which fake flatness is checked; `[0,1]ⁿ` when `None`.
    pub domain: Option<Vec<(f64, f64)>>,
    pub n_samples: usize,
    pub seed: u64,
    /// Overrides the symbolic / difference-quotient default.
    pub tolerance: Option<f64>,
}

impl Default for PairOptions {
    fn default() -> Self {
        Self {
            domain: None,
            n_samples: FC_SAMPLES,
            seed: 0,
            tolerance: None,
        }
    }
}

/// A fake-flat pair `(A, B)`: `dA + [A∧A] = t_*B`.
#[derive(Clone, Debug)]
pub struct ConnectionPair {
    cm: CrossedModule,
    a: OneFormField,
    b: TwoFormField,
    domain: Vec<(f64, f64)>,
    report: FakeCurvatureReport,
}

impl ConnectionPair {
    pub fn new(cm: &CrossedModule, a: OneFormField, b: TwoFormField) -> Result<Self> {
        Self::with_options(cm, a, b, &PairOptions::default())
    }

    pub fn with_options(
        cm: &CrossedModule,
        a: OneFormField,
        b: TwoFormField,
        opts: &PairOptions,
    ) -> Result<Self> {
        if a.descriptor().family() != cm.g().family() {
            return Err(Error::domain(format!(
                "A takes values in {} but the crossed module has G = {}",
                a.descriptor().name(),
                cm.g().name()
            )));
        }
        if b.descriptor().family() != cm.h().family() {
            return Err(Error::domain(format!(
                "B takes values in {} but the crossed module has H = {}",
                b.descriptor().name(),
                cm.h().name()
            )));
        }
        let n = a.ambient_dim();
        if b.ambient_dim() != n {
            return Err(Error::domain(format!(
                "A lives on R^{n} but B on R^{}",
                b.ambient_dim()
            )));
        }
        let domain = opts.domain.clone().unwrap_or_else(|| vec![(0.0, 1.0); n]);
        if domain.len() != n {
            return Err(Error::domain("domain box has the wrong dimension"));
        }
        let mut report = fake_curvature_residual(cm, &a, &b, &domain, opts.n_samples, opts.seed);
        if let Some(t) = opts.tolerance {
            report.tolerance = t;
        }
        if !report.passes() {
            return Err(Error::FakeCurvature {
                residual: report.max_residual,
                tolerance: report.tolerance,
                at: report.argmax.clone(),
            });
        }
        Ok(Self {
            cm: cm.clone(),
            a,
            b,
            domain,
            report,
        })
    }

    /// The pair `(A, K_A)` for `E G`.
    pub fn eg_curvature_pair(cm: &CrossedModule, a: OneFormField) -> Result<Self> {
        let b = TwoFormField::curvature_of(&a);
        Self::new(cm, a, b)
    }

    pub fn crossed_module(&self) -> &CrossedModule {
        &self.cm
    }

    pub fn a(&self) -> &OneFormField {
        &self.a
    }

    pub fn b(&self) -> &TwoFormField {
        &self.b
    }

    pub fn domain(&self) -> &[(f64, f64)] {
        &self.domain
    }

    pub fn ambient_dim(&self) -> usize {
        self.a.ambient_dim()
    }

    pub fn fake_curvature_report(&self) -> &FakeCurvatureReport {
        &self.report
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::higher_group::{make_b_abelian, make_eg};

    fn su2_form() -> OneFormField {
        OneFormField::from_exprs(
            GroupDescriptor::su(2),
            &[
                vec![vec!["i*x2", "x1*x2"], vec!["-x1*x2", "-i*x2"]],
                vec![vec!["i*sin(x1)", "i*x1^2"], vec!["i*x1^2", "-i*sin(x1)"]],
            ],
        )
        .unwrap()
    }

    #[test]
    fn pair_indexing() {
        let n = 4;
        for (k, (i, j)) in pairs(n).into_iter().enumerate() {
            assert_eq!(pair_index(n, i, j), k);
        }
    }

    #[test]
    fn rejects_values_outside_the_algebra() {
        let r = OneFormField::from_exprs(GroupDescriptor::su(2), &[vec![vec!["x1", "0"], vec!["0", "x1"]]]);
        assert!(r.is_err());
    }

    #[test]
    fn symbolic_and_native_curvature_agree() {
        let a = su2_form();
        let native = OneFormField::new(
            *a.descriptor(),
            a.components()
                .iter()
                .map(|c| {
                    let c = c.clone();
                    MatrixField::native(2, move |x| c.eval(x))
                })
                .collect(),
        )
        .unwrap();
        let x = [0.3, 0.7];
        let ks = curvature_two_form(&a, &x, &[1.0, 0.0], &[0.0, 1.0]);
        let kn = curvature_two_form(&native, &x, &[1.0, 0.0], &[0.0, 1.0]);
        assert!(ks.distance(&kn) < 1e-8);
    }

    #[test]
    fn eg_curvature_pair_is_fake_flat() {
        let cm = make_eg(GroupDescriptor::su(2));
        let pair = ConnectionPair::eg_curvature_pair(&cm, su2_form()).unwrap();
        assert!(pair.fake_curvature_report().max_residual < 1e-13);
        assert!(pair.fake_curvature_report().symbolic);
    }

    #[test]
    fn gate_rejects_perturbed_b() {
        let cm = make_eg(GroupDescriptor::su(2));
        let a = su2_form();
        let k = TwoFormField::curvature_of(&a);
        let bump = TwoFormField::from_exprs(
            GroupDescriptor::su(2),
            2,
            &[((1, 2), vec![vec!["i", "0"], vec!["0", "-i"]])],
        )
        .unwrap();
        let b = k.add_scaled(&bump, 0.1).unwrap();
        match ConnectionPair::new(&cm, a, b) {
            Err(Error::FakeCurvature { residual, .. }) => assert!(residual >= 0.1),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bianchi_identity_for_eg_curvature() {
        let cm = make_eg(GroupDescriptor::su(2));
        let a = OneFormField::from_exprs(
            GroupDescriptor::su(2),
            &[
                vec![vec!["i*x2*x3", "x1"], vec!["-x1", "-i*x2*x3"]],
                vec![vec!["0", "i*x3"], vec!["i*x3", "0"]],
                vec![vec!["i*x1^2", "x2"], vec!["-x2", "-i*x1^2"]],
            ],
        )
        .unwrap();
        let b = TwoFormField::curvature_of(&a);
        for h in curvature_three_form(&cm, &a, &b, &[0.2, 0.5, 0.9]) {
            assert!(h.norm() < 1e-12);
        }
    }

    #[test]
    fn abelian_pair_accepts_any_b() {
        let cm = make_b_abelian(GroupDescriptor::u1()).unwrap();
        let a = OneFormField::zero(GroupDescriptor::trivial(), 2);
        let b = TwoFormField::from_exprs(GroupDescriptor::u1(), 2, &[((1, 2), vec![vec!["i*(1+x1*x2)"]])]).unwrap();
        assert!(ConnectionPair::new(&cm, a, b).is_ok());
    }
}
