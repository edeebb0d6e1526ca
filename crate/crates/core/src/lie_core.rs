//! Matrix Lie groups and their Lie algebras.
//!
//! Every group is realized as a group of complex `n × n` matrices; real
//! groups simply carry matrices with vanishing imaginary part. Elements are
//! immutable values tagged with their [`GroupDescriptor`].

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<Complex64>;

pub const DEFAULT_MEMBERSHIP_TOLERANCE: f64 = 1e-9;

/// Families of matrix groups supported as structure groups.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GroupFamily {
    U1,
    SU(usize),
    SO(usize),
    GL(usize),
    UpperUnipotent(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Field {
    Real,
    Complex,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GroupDescriptor {
    family: GroupFamily,
    tolerance: f64,
}

impl GroupDescriptor {
    pub fn new(family: GroupFamily) -> Result<Self> {
        let n = match family {
            GroupFamily::U1 => 1,
            GroupFamily::SU(n)
            | GroupFamily::SO(n)
            | GroupFamily::GL(n)
            | GroupFamily::UpperUnipotent(n) => n,
        };
        if n == 0 {
            return Err(Error::domain("matrix dimension must be at least 1"));
        }
        Ok(Self {
            family,
            tolerance: DEFAULT_MEMBERSHIP_TOLERANCE,
        })
    }

    pub fn u1() -> Self {
        Self::new(GroupFamily::U1).unwrap()
    }

    pub fn su(n: usize) -> Self {
        Self::new(GroupFamily::SU(n)).expect("n >= 1")
    }

    pub fn so(n: usize) -> Self {
        Self::new(GroupFamily::SO(n)).expect("n >= 1")
    }

    pub fn gl(n: usize) -> Self {
        Self::new(GroupFamily::GL(n)).expect("n >= 1")
    }

    pub fn upper_unipotent(n: usize) -> Self {
        Self::new(GroupFamily::UpperUnipotent(n)).expect("n >= 1")
    }

    /// The trivial group, realized as `SU(1) = {1}`.
    pub fn trivial() -> Self {
        Self::su(1)
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Result<Self> {
        if !(tolerance > 0.0 && tolerance.is_finite()) {
            return Err(Error::domain("membership tolerance must be positive"));
        }
        self.tolerance = tolerance;
        Ok(self)
    }

    /// Parses names such as `U1`, `SU(2)`, `su2`, `SO(3)`, `GL(2)`, `UT(3)`.
    pub fn parse(name: &str) -> Result<Self> {
        let compact: String = name
            .chars()
            .filter(|c| !c.is_whitespace())
            .collect::<String>()
            .to_ascii_lowercase();
        if compact == "u1" || compact == "u(1)" {
            return Ok(Self::u1());
        }
        let prefixes: [(&str, fn(usize) -> GroupFamily); 7] = [
            ("upperunipotent", GroupFamily::UpperUnipotent),
            ("uppertriangularunipotent", GroupFamily::UpperUnipotent),
            ("ut", GroupFamily::UpperUnipotent),
            ("sun", GroupFamily::SU),
            ("su", GroupFamily::SU),
            ("son", GroupFamily::SO),
            ("so", GroupFamily::SO),
        ];
        let mut candidates: Vec<(&str, fn(usize) -> GroupFamily)> = prefixes.to_vec();
        candidates.push(("gln", GroupFamily::GL));
        candidates.push(("gl", GroupFamily::GL));
        for (prefix, ctor) in candidates {
            if let Some(rest) = compact.strip_prefix(prefix) {
                let digits = rest.trim_start_matches('(').trim_end_matches(')');
                if let Ok(n) = digits.parse::<usize>() {
                    return Self::new(ctor(n));
                }
            }
        }
        Err(Error::domain(format!("unknown group name `{name}`")))
    }

    pub fn family(&self) -> GroupFamily {
        self.family
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn dim(&self) -> usize {
        match self.family {
            GroupFamily::U1 => 1,
            GroupFamily::SU(n)
            | GroupFamily::SO(n)
            | GroupFamily::GL(n)
            | GroupFamily::UpperUnipotent(n) => n,
        }
    }

    pub fn field(&self) -> Field {
        match self.family {
            GroupFamily::U1 | GroupFamily::SU(_) => Field::Complex,
            _ => Field::Real,
        }
    }

    /// Dimension of the Lie algebra as a real vector space.
    pub fn algebra_dim(&self) -> usize {
        let n = self.dim();
        match self.family {
            GroupFamily::U1 => 1,
            GroupFamily::SU(_) => n * n - 1,
            GroupFamily::SO(_) | GroupFamily::UpperUnipotent(_) => n * (n - 1) / 2,
            GroupFamily::GL(_) => n * n,
        }
    }

    pub fn is_abelian(&self) -> bool {
        match self.family {
            GroupFamily::U1 => true,
            GroupFamily::SU(n) => n == 1,
            GroupFamily::SO(n) => n <= 2,
            GroupFamily::GL(n) => n == 1,
            GroupFamily::UpperUnipotent(n) => n <= 2,
        }
    }

    pub fn is_compact(&self) -> bool {
        matches!(
            self.family,
            GroupFamily::U1 | GroupFamily::SU(_) | GroupFamily::SO(_)
        )
    }

    pub fn identity_matrix(&self) -> CMat {
        CMat::identity(self.dim(), self.dim())
    }

    /// Distance of a matrix from the group, zero for exact members.
    pub fn group_residual(&self, m: &CMat) -> f64 {
        let n = self.dim();
        if m.nrows() != n || m.ncols() != n {
            return f64::INFINITY;
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return f64::INFINITY;
        }
        let id = self.identity_matrix();
        match self.family {
            GroupFamily::U1 => (m[(0, 0)].norm() - 1.0).abs(),
            GroupFamily::SU(_) => {
                (m.adjoint() * m - &id).norm() + (m.determinant() - C64::new(1.0, 0.0)).norm()
            }
            GroupFamily::SO(_) => {
                imag_norm(m)
                    + (m.transpose() * m - &id).norm()
                    + (m.determinant() - C64::new(1.0, 0.0)).norm()
            }
            GroupFamily::GL(_) => {
                let scale = m.norm().max(1.0).powi(n as i32);
                let singular = if m.determinant().norm() <= 1e-12 * scale {
                    1.0
                } else {
                    0.0
                };
                imag_norm(m) + singular
            }
            GroupFamily::UpperUnipotent(_) => {
                let mut r = imag_norm(m);
                for i in 0..n {
                    r += (m[(i, i)] - C64::new(1.0, 0.0)).norm();
                    for j in 0..i {
                        r += m[(i, j)].norm();
                    }
                }
                r
            }
        }
    }

    /// Distance of a matrix from the Lie algebra.
    pub fn algebra_residual(&self, x: &CMat) -> f64 {
        let n = self.dim();
        if x.nrows() != n || x.ncols() != n {
            return f64::INFINITY;
        }
        if x.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return f64::INFINITY;
        }
        (x - self.project_algebra(x)).norm()
    }

    /// Orthogonal (Frobenius) projection onto the Lie algebra.
    pub fn project_algebra(&self, x: &CMat) -> CMat {
        let n = self.dim();
        match self.family {
            GroupFamily::U1 => CMat::from_element(1, 1, C64::new(0.0, x[(0, 0)].im)),
            GroupFamily::SU(_) => {
                let mut y = (x - x.adjoint()) * C64::new(0.5, 0.0);
                let tr = y.trace() / C64::new(n as f64, 0.0);
                for i in 0..n {
                    y[(i, i)] -= tr;
                }
                y
            }
            GroupFamily::SO(_) => {
                let r = x.map(|z| C64::new(z.re, 0.0));
                (&r - r.transpose()) * C64::new(0.5, 0.0)
            }
            GroupFamily::GL(_) => x.map(|z| C64::new(z.re, 0.0)),
            GroupFamily::UpperUnipotent(_) => {
                let mut y = x.map(|z| C64::new(z.re, 0.0));
                for i in 0..n {
                    for j in 0..=i {
                        y[(i, j)] = C64::new(0.0, 0.0);
                    }
                }
                y
            }
        }
    }

    /// Maps a nearby matrix back onto the group. Unitary and orthogonal
    /// families use the polar factor; special families also fix the
    /// determinant. GL is left untouched.
    pub fn retract(&self, m: &CMat) -> CMat {
        let n = self.dim();
        match self.family {
            GroupFamily::U1 => {
                let z = m[(0, 0)];
                let r = z.norm();
                if r > 0.0 {
                    CMat::from_element(1, 1, z / r)
                } else {
                    m.clone()
                }
            }
            GroupFamily::SU(_) => {
                let mut u = polar_factor(m);
                if n > 1 {
                    let det = u.determinant();
                    let root = det.powf(1.0 / n as f64);
                    if root.norm() > 0.0 {
                        u /= root;
                    }
                } else {
                    u = self.identity_matrix();
                }
                u
            }
            GroupFamily::SO(_) => polar_factor(&m.map(|z| C64::new(z.re, 0.0))),
            GroupFamily::GL(_) => m.map(|z| C64::new(z.re, 0.0)),
            GroupFamily::UpperUnipotent(_) => {
                let mut y = m.map(|z| C64::new(z.re, 0.0));
                for i in 0..n {
                    y[(i, i)] = C64::new(1.0, 0.0);
                    for j in 0..i {
                        y[(i, j)] = C64::new(0.0, 0.0);
                    }
                }
                y
            }
        }
    }

    /// A basis of the Lie algebra over the reals, orthogonal for the
    /// Frobenius inner product.
    pub fn algebra_basis(&self) -> Vec<CMat> {
        let n = self.dim();
        let e = |i: usize, j: usize, z: C64| {
            let mut m = CMat::zeros(n, n);
            m[(i, j)] = z;
            m
        };
        let one = C64::new(1.0, 0.0);
        let im = C64::new(0.0, 1.0);
        let mut out = Vec::new();
        match self.family {
            GroupFamily::U1 => out.push(e(0, 0, im)),
            GroupFamily::SU(_) => {
                for j in 0..n {
                    for k in (j + 1)..n {
                        out.push(e(j, k, im) + e(k, j, im));
                        out.push(e(j, k, one) - e(k, j, one));
                    }
                }
                // generalized Gell-Mann diagonals
                for l in 1..n {
                    let mut m = CMat::zeros(n, n);
                    for k in 0..l {
                        m[(k, k)] = im;
                    }
                    m[(l, l)] = im * (-(l as f64));
                    let scale = (2.0 / (l * (l + 1)) as f64).sqrt();
                    out.push(m * C64::new(scale, 0.0));
                }
            }
            GroupFamily::SO(_) => {
                for j in 0..n {
                    for k in (j + 1)..n {
                        out.push(e(j, k, one) - e(k, j, one));
                    }
                }
            }
            GroupFamily::GL(_) => {
                for j in 0..n {
                    for k in 0..n {
                        out.push(e(j, k, one));
                    }
                }
            }
            GroupFamily::UpperUnipotent(_) => {
                for j in 0..n {
                    for k in (j + 1)..n {
                        out.push(e(j, k, one));
                    }
                }
            }
        }
        out
    }

    /// Inverse of a group matrix. Uses the adjoint for U(1) and LU otherwise.
    pub fn invert(&self, m: &CMat) -> Result<CMat> {
        if self.family == GroupFamily::U1 {
            let z = m[(0, 0)];
            if z.norm() == 0.0 {
                return Err(Error::numerical("singular U(1) element"));
            }
            return Ok(CMat::from_element(1, 1, z.inv()));
        }
        m.clone()
            .try_inverse()
            .ok_or_else(|| Error::numerical("singular group matrix"))
    }

    pub fn name(&self) -> String {
        match self.family {
            GroupFamily::U1 => "U1".to_string(),
            GroupFamily::SU(n) => format!("SU({n})"),
            GroupFamily::SO(n) => format!("SO({n})"),
            GroupFamily::GL(n) => format!("GL({n})"),
            GroupFamily::UpperUnipotent(n) => format!("UT({n})"),
        }
    }

    fn check_shape(&self, m: &CMat) -> Result<()> {
        if m.nrows() != self.dim() || m.ncols() != self.dim() {
            return Err(Error::domain(format!(
                "expected a {n}x{n} matrix for {}, got {}x{}",
                self.name(),
                m.nrows(),
                m.ncols(),
                n = self.dim()
            )));
        }
        Ok(())
    }
}

impl fmt::Display for GroupDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

fn imag_norm(m: &CMat) -> f64 {
    m.iter().map(|z| z.im * z.im).sum::<f64>().sqrt()
}

/// Unitary polar factor by Newton-Schulz iteration. Only intended for
/// matrices already close to the unitary group.
pub fn polar_factor(m: &CMat) -> CMat {
    let n = m.nrows();
    let three = CMat::identity(n, n) * C64::new(3.0, 0.0);
    let mut x = m.clone();
    for _ in 0..8 {
        let gram = x.adjoint() * &x;
        let defect = (&gram - CMat::identity(n, n)).norm();
        if defect < 1e-15 {
            break;
        }
        x = &x * (&three - gram) * C64::new(0.5, 0.0);
    }
    x
}

/// Matrix exponential by scaling and squaring with a truncated Taylor series.
pub fn expm(a: &CMat) -> CMat {
    let n = a.nrows();
    let norm = a.iter().map(|z| z.norm()).fold(0.0, f64::max) * n as f64;
    let mut squarings = 0u32;
    if norm > 0.25 {
        squarings = (norm / 0.25).log2().ceil() as u32;
    }
    let scaled = a * C64::new(0.5f64.powi(squarings as i32), 0.0);
    let mut result = CMat::identity(n, n);
    let mut term = CMat::identity(n, n);
    for k in 1..=30 {
        term = &term * &scaled * C64::new(1.0 / k as f64, 0.0);
        result += &term;
        if term.norm() < 1e-18 {
            break;
        }
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

/// An immutable element of a matrix group.
#[derive(Clone, Debug)]
pub struct GroupElement {
    descriptor: GroupDescriptor,
    matrix: CMat,
}

impl GroupElement {
    /// Validates membership within the descriptor tolerance.
    pub fn new(descriptor: GroupDescriptor, matrix: CMat) -> Result<Self> {
        descriptor.check_shape(&matrix)?;
        let r = descriptor.group_residual(&matrix);
        if !r.is_finite() {
            return Err(Error::numerical("non-finite group matrix"));
        }
        if r > descriptor.tolerance() {
            return Err(Error::domain(format!(
                "matrix is not in {} (residual {r:.3e})",
                descriptor.name()
            )));
        }
        Ok(Self { descriptor, matrix })
    }

    /// Skips validation. For values produced by the integrators.
    pub fn trusted(descriptor: GroupDescriptor, matrix: CMat) -> Self {
        debug_assert_eq!(matrix.nrows(), descriptor.dim());
        Self { descriptor, matrix }
    }

    pub fn identity(descriptor: GroupDescriptor) -> Self {
        Self {
            matrix: descriptor.identity_matrix(),
            descriptor,
        }
    }

    pub fn descriptor(&self) -> &GroupDescriptor {
        &self.descriptor
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMat {
        self.matrix
    }

    pub fn mul(&self, other: &GroupElement) -> GroupElement {
        debug_assert_eq!(self.descriptor.family, other.descriptor.family);
        Self::trusted(self.descriptor, &self.matrix * &other.matrix)
    }

    pub fn inverse(&self) -> GroupElement {
        let inv = self
            .descriptor
            .invert(&self.matrix)
            .expect("group elements are invertible");
        Self::trusted(self.descriptor, inv)
    }

    /// Frobenius distance between the underlying matrices.
    pub fn distance(&self, other: &GroupElement) -> f64 {
        (&self.matrix - &other.matrix).norm()
    }

    pub fn membership_residual(&self) -> f64 {
        self.descriptor.group_residual(&self.matrix)
    }
}

/// An immutable element of a matrix Lie algebra.
#[derive(Clone, Debug)]
pub struct AlgebraElement {
    descriptor: GroupDescriptor,
    matrix: CMat,
}

impl AlgebraElement {
    pub fn new(descriptor: GroupDescriptor, matrix: CMat) -> Result<Self> {
        descriptor.check_shape(&matrix)?;
        let r = descriptor.algebra_residual(&matrix);
        if !r.is_finite() {
            return Err(Error::numerical("non-finite algebra matrix"));
        }
        if r > descriptor.tolerance() * matrix.norm().max(1.0) {
            return Err(Error::domain(format!(
                "matrix is not in the Lie algebra of {} (residual {r:.3e})",
                descriptor.name()
            )));
        }
        Ok(Self { descriptor, matrix })
    }

    /// Projects an arbitrary matrix onto the algebra.
    pub fn projected(descriptor: GroupDescriptor, matrix: &CMat) -> Self {
        Self {
            matrix: descriptor.project_algebra(matrix),
            descriptor,
        }
    }

    pub fn trusted(descriptor: GroupDescriptor, matrix: CMat) -> Self {
        debug_assert_eq!(matrix.nrows(), descriptor.dim());
        Self { descriptor, matrix }
    }

    pub fn zero(descriptor: GroupDescriptor) -> Self {
        Self {
            matrix: CMat::zeros(descriptor.dim(), descriptor.dim()),
            descriptor,
        }
    }

    /// Linear combination of the basis returned by
    /// [`GroupDescriptor::algebra_basis`].
    pub fn from_coordinates(descriptor: GroupDescriptor, coords: &[f64]) -> Result<Self> {
        let basis = descriptor.algebra_basis();
        if coords.len() != basis.len() {
            return Err(Error::domain(format!(
                "expected {} coordinates, got {}",
                basis.len(),
                coords.len()
            )));
        }
        let mut m = CMat::zeros(descriptor.dim(), descriptor.dim());
        for (c, b) in coords.iter().zip(&basis) {
            m += b * C64::new(*c, 0.0);
        }
        Ok(Self::trusted(descriptor, m))
    }

    pub fn coordinates(&self) -> Vec<f64> {
        self.descriptor
            .algebra_basis()
            .iter()
            .map(|b| frobenius_inner(b, &self.matrix) / frobenius_inner(b, b))
            .collect()
    }

    pub fn descriptor(&self) -> &GroupDescriptor {
        &self.descriptor
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMat {
        self.matrix
    }

    pub fn add(&self, other: &AlgebraElement) -> AlgebraElement {
        Self::trusted(self.descriptor, &self.matrix + &other.matrix)
    }

    pub fn sub(&self, other: &AlgebraElement) -> AlgebraElement {
        Self::trusted(self.descriptor, &self.matrix - &other.matrix)
    }

    pub fn scale(&self, c: f64) -> AlgebraElement {
        Self::trusted(self.descriptor, &self.matrix * C64::new(c, 0.0))
    }

    pub fn norm(&self) -> f64 {
        self.matrix.norm()
    }

    pub fn distance(&self, other: &AlgebraElement) -> f64 {
        (&self.matrix - &other.matrix).norm()
    }
}

/// Real part of the Frobenius inner product `tr(a† b)`.
pub fn frobenius_inner(a: &CMat, b: &CMat) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x.conj() * y).re).sum()
}

pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}

/// `exp(X)`, validated against the group to ten times its tolerance.
pub fn exp_map(x: &AlgebraElement) -> Result<GroupElement> {
    let d = *x.descriptor();
    let m = expm(x.matrix());
    let r = d.group_residual(&m);
    if !r.is_finite() || r > 10.0 * d.tolerance() * (1.0 + x.norm()) {
        return Err(Error::numerical(format!(
            "exponential left the group (residual {r:.3e})"
        )));
    }
    Ok(GroupElement::trusted(d, m))
}

/// `Ad_g(X) = g X g⁻¹`.
pub fn adjoint(g: &GroupElement, x: &AlgebraElement) -> AlgebraElement {
    let ginv = g.inverse();
    AlgebraElement::trusted(*x.descriptor(), g.matrix() * x.matrix() * ginv.matrix())
}

pub fn bracket(x: &AlgebraElement, y: &AlgebraElement) -> AlgebraElement {
    AlgebraElement::trusted(*x.descriptor(), commutator(x.matrix(), y.matrix()))
}

/// Differential of right multiplication by `g` applied to `X`: the tangent
/// vector `X·g` at `g`.
pub fn right_translate_diff(g: &GroupElement, x: &AlgebraElement) -> CMat {
    x.matrix() * g.matrix()
}

/// A smooth group-valued curve on a closed interval.
#[derive(Clone)]
pub struct GroupCurve<'a> {
    descriptor: GroupDescriptor,
    domain: (f64, f64),
    eval: &'a (dyn Fn(f64) -> CMat + Sync),
}

impl<'a> GroupCurve<'a> {
    pub fn new(
        descriptor: GroupDescriptor,
        domain: (f64, f64),
        eval: &'a (dyn Fn(f64) -> CMat + Sync),
    ) -> Self {
        Self {
            descriptor,
            domain,
            eval,
        }
    }
}

/// Right Maurer-Cartan form `dg · g⁻¹` of a curve, by central differences.
pub fn maurer_cartan_right(curve: &GroupCurve<'_>, t: f64, fd_step: f64) -> Result<AlgebraElement> {
    let (a, b) = curve.domain;
    if t - fd_step < a || t + fd_step > b {
        return Err(Error::domain(format!(
            "t = {t} is within {fd_step} of the curve boundary [{a}, {b}]"
        )));
    }
    let d = curve.descriptor;
    let plus = (curve.eval)(t + fd_step);
    let minus = (curve.eval)(t - fd_step);
    let g = (curve.eval)(t);
    let deriv = (plus - minus) * C64::new(0.5 / fd_step, 0.0);
    let x = deriv * d.invert(&g)?;
    Ok(AlgebraElement::projected(d, &x))
}
