//! The BF action `S(A, B) = ½∫⟨β∧β⟩`, `β = F_A - t_*B`, on the cube `[0,1]⁴`.
//!
//! With `β = Σ_{i<j} βᵢⱼ dxⁱ∧dxʲ` the integrand is
//! `⟨β₁₂,β₃₄⟩ - ⟨β₁₃,β₂₄⟩ + ⟨β₁₄,β₂₃⟩`. Integrals use a tensor
//! Gauss-Legendre rule; no boundary terms are considered.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::forms::{pair_index, Expr, ExprMatrix, MatrixField, OneFormField, TwoFormField};
use crate::higher_group::CrossedModule;
use crate::lie_core::{AlgebraElement, CMat, GroupDescriptor, C64};
use crate::quadrature::{gauss_legendre, halton_in_box, pairwise_sum};

/// Default step of the central differences in [`criticality_check`].
pub const DEFAULT_EPSILON: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PairingKind {
    /// `⟨X, Y⟩ = -Re tr(XY)`, positive definite on compact algebras.
    NegTrace,
    /// `⟨X, Y⟩ = Re tr(XY)`.
    Trace,
}

/// An invariant symmetric bilinear form on the Lie algebra of `G`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PairingSpec {
    pub kind: PairingKind,
}

impl PairingSpec {
    /// `NegTrace` for compact groups, `Trace` otherwise.
    pub fn for_group(d: &GroupDescriptor) -> Self {
        let kind = if d.is_compact() {
            PairingKind::NegTrace
        } else {
            PairingKind::Trace
        };
        Self { kind }
    }

    pub fn eval(&self, x: &CMat, y: &CMat) -> f64 {
        let mut tr = 0.0;
        for i in 0..x.nrows() {
            for k in 0..x.ncols() {
                tr += (x[(i, k)] * y[(k, i)]).re;
            }
        }
        match self.kind {
            PairingKind::NegTrace => -tr,
            PairingKind::Trace => tr,
        }
    }

    /// Largest `|⟨Ad_g X, Ad_g Y⟩ - ⟨X, Y⟩|` and symmetry defect over random samples.
    pub fn invariance_residual(&self, d: &GroupDescriptor, n: usize, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst = 0.0f64;
        for _ in 0..n {
            let g = crate::higher_group::random_element(d, &mut rng, 1.0);
            let x = random_algebra(d, &mut rng);
            let y = random_algebra(d, &mut rng);
            let ginv = d.invert(g.matrix()).expect("group element");
            let gx = g.matrix() * &x * &ginv;
            let gy = g.matrix() * &y * &ginv;
            worst = worst
                .max((self.eval(&gx, &gy) - self.eval(&x, &y)).abs())
                .max((self.eval(&x, &y) - self.eval(&y, &x)).abs());
        }
        worst
    }
}

fn random_algebra(d: &GroupDescriptor, rng: &mut impl Rng) -> CMat {
    let coords: Vec<f64> = (0..d.algebra_dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    AlgebraElement::from_coordinates(*d, &coords)
        .map(AlgebraElement::into_matrix)
        .unwrap_or_else(|_| CMat::zeros(d.dim(), d.dim()))
}

/// Tensor Gauss-Legendre grid on a box in `ℝ⁴`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridSpec {
    /// Nodes per axis.
    pub n: usize,
    pub domain: [(f64, f64); 4],
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            n: 12,
            domain: [(0.0, 1.0); 4],
        }
    }
}

impl GridSpec {
    pub fn with_n(n: usize) -> Self {
        Self {
            n,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::domain("the BF grid needs at least 2 nodes per axis"));
        }
        if self.domain.iter().any(|(a, b)| !(b > a)) {
            return Err(Error::domain("the BF domain box is empty"));
        }
        Ok(())
    }
}

fn grid_point(grid: &GridSpec, nodes: &[f64], weights: &[f64], idx: usize) -> ([f64; 4], f64) {
    let n = nodes.len();
    let mut x = [0.0; 4];
    let mut w = 1.0;
    let mut r = idx;
    for axis in 0..4 {
        let k = r % n;
        r /= n;
        let (lo, hi) = grid.domain[axis];
        x[axis] = lo + (hi - lo) * nodes[k];
        w *= weights[k] * (hi - lo);
    }
    (x, w)
}

/// `∫ f` over the grid for `k` integrands at once, each reduced by a
/// deterministic pairwise sum.
fn integrate(grid: &GridSpec, n: usize, k: usize, f: &(dyn Fn(&[f64]) -> Vec<f64> + Sync)) -> Vec<f64> {
    let (nodes, weights) = gauss_legendre(n);
    let values: Vec<Vec<f64>> = (0..n.pow(4))
        .into_par_iter()
        .map(|idx| {
            let (x, w) = grid_point(grid, &nodes, &weights, idx);
            f(&x).into_iter().map(|v| v * w).collect()
        })
        .collect();
    (0..k)
        .map(|slot| {
            let column: Vec<f64> = values.iter().map(|v| v[slot]).collect();
            pairwise_sum(&column)
        })
        .collect()
}

/// `∫⟨X∧Y⟩` coefficient `X₁₂Y₃₄ + X₃₄Y₁₂ - X₁₃Y₂₄ - X₂₄Y₁₃ + X₁₄Y₂₃ + X₂₃Y₁₄`
/// from components indexed by [`pair_index`].
fn wedge4(p: &PairingSpec, x: &[CMat], y: &[CMat]) -> f64 {
    let i = |a, b| pair_index(4, a, b);
    let term = |a: usize, b: usize| p.eval(&x[a], &y[b]) + p.eval(&x[b], &y[a]);
    term(i(0, 1), i(2, 3)) - term(i(0, 2), i(1, 3)) + term(i(0, 3), i(1, 2))
}

fn check_forms(cm: &CrossedModule, a: &OneFormField, b: &TwoFormField) -> Result<()> {
    if a.ambient_dim() != 4 || b.ambient_dim() != 4 {
        return Err(Error::domain("BF theory is set up on [0,1]^4"));
    }
    if a.descriptor().family() != cm.g().family() || b.descriptor().family() != cm.h().family() {
        return Err(Error::domain("forms do not match the crossed module"));
    }
    Ok(())
}

fn curvature_components(a: &OneFormField, x: &[f64]) -> Vec<CMat> {
    crate::forms::pairs(4)
        .into_iter()
        .map(|(i, j)| a.curvature_component(x, i, j))
        .collect()
}

fn tb_components(cm: &CrossedModule, b: &TwoFormField, x: &[f64]) -> Vec<CMat> {
    b.components().iter().map(|c| cm.t_star_matrix(&c.eval(x))).collect()
}

/// `β = F_A - t_*B` on the coordinate planes `(i, j)`, `i < j`, in
/// lexicographic order. The pair need not be fake-flat.
pub fn beta_field(cm: &CrossedModule, a: &OneFormField, b: &TwoFormField, x: &[f64]) -> Vec<AlgebraElement> {
    curvature_components(a, x)
        .into_iter()
        .zip(tb_components(cm, b, x))
        .map(|(f, tb)| AlgebraElement::trusted(*cm.g(), f - tb))
        .collect()
}

/// The action with an estimate of the quadrature error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BfAction {
    pub value: f64,
    /// `|S_n - S_{n/2}|`
    pub error_estimate: f64,
}

fn action_at(cm: &CrossedModule, a: &OneFormField, b: &TwoFormField, p: &PairingSpec, grid: &GridSpec, n: usize) -> f64 {
    let f = |x: &[f64]| {
        let beta: Vec<CMat> = beta_field(cm, a, b, x).into_iter().map(AlgebraElement::into_matrix).collect();
        vec![0.5 * wedge4(p, &beta, &beta)]
    };
    integrate(grid, n, 1, &f)[0]
}

/// `S(A, B) = ½∫⟨β∧β⟩` over the grid.
pub fn bf_action(
    cm: &CrossedModule,
    a: &OneFormField,
    b: &TwoFormField,
    pairing: &PairingSpec,
    grid: &GridSpec,
) -> Result<BfAction> {
    grid.validate()?;
    check_forms(cm, a, b)?;
    let value = action_at(cm, a, b, pairing, grid, grid.n);
    let coarse = action_at(cm, a, b, pairing, grid, (grid.n / 2).max(1));
    if !value.is_finite() {
        return Err(Error::numerical("BF action is not finite"));
    }
    Ok(BfAction {
        value,
        error_estimate: (value - coarse).abs(),
    })
}

/// `S = ½∫⟨F∧F⟩ - ∫⟨t_*B∧F⟩ + ½∫⟨t_*B∧t_*B⟩`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ActionDecomposition {
    pub yang_mills: f64,
    pub bf_term: f64,
    pub cosmological: f64,
}

impl ActionDecomposition {
    pub fn total(&self) -> f64 {
        self.yang_mills + self.bf_term + self.cosmological
    }
}

pub fn action_decomposition(
    cm: &CrossedModule,
    a: &OneFormField,
    b: &TwoFormField,
    pairing: &PairingSpec,
    grid: &GridSpec,
) -> Result<ActionDecomposition> {
    grid.validate()?;
    check_forms(cm, a, b)?;
    let f = |x: &[f64]| {
        let fa = curvature_components(a, x);
        let tb = tb_components(cm, b, x);
        vec![
            0.5 * wedge4(pairing, &fa, &fa),
            -wedge4(pairing, &tb, &fa),
            0.5 * wedge4(pairing, &tb, &tb),
        ]
    };
    let terms = integrate(grid, grid.n, 3, &f);
    let (yang_mills, bf_term, cosmological) = (terms[0], terms[1], terms[2]);
    Ok(ActionDecomposition {
        yang_mills,
        bf_term,
        cosmological,
    })
}

/// Directional derivatives of the action along random perturbations.
#[derive(Clone, Debug, PartialEq)]
pub struct CriticalityReport {
    pub action: f64,
    /// `dS/dε` along each direction `(δA, δB)`.
    pub derivatives: Vec<f64>,
    pub max_derivative: f64,
    /// Sup of `‖βᵢⱼ‖` over the grid nodes.
    pub beta_sup: f64,
    pub epsilon: f64,
    pub seed: u64,
}

/// A random polynomial form of degree ≤ 2 with sup-norm 1 on the cube.
fn random_components(d: &GroupDescriptor, count: usize, rng: &mut impl Rng) -> Vec<ExprMatrix> {
    let basis = d.algebra_basis();
    let mut monomials = vec![Expr::real(1.0)];
    for i in 0..4 {
        monomials.push(Expr::var(i));
        for j in i..4 {
            monomials.push(Expr::mul(Expr::var(i), Expr::var(j)));
        }
    }
    let mut comps: Vec<ExprMatrix> = (0..count)
        .map(|_| {
            let mut m = ExprMatrix::zeros(d.dim(), d.dim());
            for e in &basis {
                let mut poly = Expr::zero();
                for mono in &monomials {
                    poly = Expr::add(poly, Expr::mul(Expr::real(rng.gen_range(-1.0..1.0)), mono.clone()));
                }
                m = m.add(&ExprMatrix::constant_times(e, &poly));
            }
            m
        })
        .collect();
    let probe = halton_in_box(&[(0.0, 1.0); 4], 256, 0, 0.0);
    let mut sup = 0.0f64;
    for x in &probe {
        for c in &comps {
            sup = sup.max(c.eval(x).norm());
        }
    }
    if sup > 0.0 {
        let s = Expr::real(1.0 / sup);
        comps = comps.into_iter().map(|c| c.scale(&s)).collect();
    }
    comps
}

/// Central differences of `S` along `n_directions` random polynomial
/// perturbations of both fields, each of unit sup-norm.
#[allow(clippy::too_many_arguments)]
pub fn criticality_check(
    cm: &CrossedModule,
    a: &OneFormField,
    b: &TwoFormField,
    pairing: &PairingSpec,
    grid: &GridSpec,
    n_directions: usize,
    epsilon: f64,
    seed: u64,
) -> Result<CriticalityReport> {
    grid.validate()?;
    check_forms(cm, a, b)?;
    if !(epsilon > 0.0) {
        return Err(Error::domain("epsilon must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let directions: Vec<(Vec<MatrixField>, Vec<MatrixField>)> = (0..n_directions)
        .map(|_| {
            let da = random_components(cm.g(), 4, &mut rng);
            let db = random_components(cm.h(), 6, &mut rng);
            let sym = |v: Vec<ExprMatrix>| v.into_iter().map(|m| MatrixField::symbolic(m, 4)).collect();
            (sym(da), sym(db))
        })
        .collect();
    // S is evaluated at A ± εδA, B ± εδB for every direction in one sweep;
    // the curvature of the shifted connection is assembled from the jets of
    // A and δA at each node.
    let eps = C64::new(epsilon, 0.0);
    let f = |x: &[f64]| -> Vec<f64> {
        let a_val: Vec<CMat> = a.components().iter().map(|c| c.eval(x)).collect();
        let a_jet: Vec<Vec<CMat>> = (0..4)
            .map(|i| a.components().iter().map(|c| c.partial(x, i)).collect())
            .collect();
        let tb = tb_components(cm, b, x);
        let mut out = Vec::with_capacity(2 * directions.len() + 1);
        let base: Vec<CMat> = beta_field(cm, a, b, x).into_iter().map(AlgebraElement::into_matrix).collect();
        out.push(0.5 * wedge4(pairing, &base, &base));
        for (da, db) in &directions {
            let d_val: Vec<CMat> = da.iter().map(|c| c.eval(x)).collect();
            let d_jet: Vec<Vec<CMat>> = (0..4).map(|i| da.iter().map(|c| c.partial(x, i)).collect()).collect();
            let d_tb: Vec<CMat> = db.iter().map(|c| cm.t_star_matrix(&c.eval(x))).collect();
            for sign in [1.0, -1.0] {
                let e = eps * sign;
                let val: Vec<CMat> = a_val.iter().zip(&d_val).map(|(p, q)| p + q * e).collect();
                let beta: Vec<CMat> = crate::forms::pairs(4)
                    .into_iter()
                    .enumerate()
                    .map(|(k, (i, j))| {
                        let da_ij = &a_jet[i][j] + &d_jet[i][j] * e;
                        let da_ji = &a_jet[j][i] + &d_jet[j][i] * e;
                        da_ij - da_ji + &val[i] * &val[j] - &val[j] * &val[i] - (&tb[k] + &d_tb[k] * e)
                    })
                    .collect();
                out.push(0.5 * wedge4(pairing, &beta, &beta));
            }
        }
        out
    };
    let values = integrate(grid, grid.n, 2 * n_directions + 1, &f);
    let action = values[0];
    let derivatives: Vec<f64> = (0..n_directions)
        .map(|d| (values[1 + 2 * d] - values[2 + 2 * d]) / (2.0 * epsilon))
        .collect();
    let (nodes, weights) = gauss_legendre(grid.n);
    let mut beta_sup = 0.0f64;
    for idx in 0..grid.n.pow(4) {
        let (x, _) = grid_point(grid, &nodes, &weights, idx);
        for beta in beta_field(cm, a, b, &x) {
            beta_sup = beta_sup.max(beta.norm());
        }
    }
    let max_derivative = derivatives.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    Ok(CriticalityReport {
        action,
        derivatives,
        max_derivative,
        beta_sup,
        epsilon,
        seed,
    })
}
