//! Dense complex linear algebra for the small Hermitian matrices that carry
//! Hamiltonians, density matrices and their square roots.
//!
//! Eigendecompositions use a cyclic complex Jacobi sweep up to
//! [`JACOBI_MAX_DIM`] and Householder tridiagonalization followed by implicit
//! QR (via `nalgebra`) above it. Both paths finish with the same ordering and
//! phase-fixing step, so callers see one deterministic convention.

use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Range, Sub, SubAssign};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Relative tolerance for grouping eigenvalues into degenerate clusters.
pub const DEFAULT_DEGENERACY_TOL: f64 = 1e-9;

/// Largest dimension handled by the Jacobi solver.
pub const JACOBI_MAX_DIM: usize = 8;

/// Sweep cap of the Jacobi solver.
pub const JACOBI_MAX_SWEEPS: usize = 100;

/// Iteration cap handed to the tridiagonal QR fallback.
pub const QR_MAX_ITERATIONS: usize = 10_000;

/// Relative Hermiticity tolerance accepted on input.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Eigenvalues in `[-PSD_CLAMP, 0)` are treated as zero by [`psd_sqrt`].
pub const PSD_CLAMP: f64 = 1e-12;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// Dense square complex matrix stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn new(dim: usize, data: Vec<Complex64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::DimensionMismatch { expected: 1, actual: 0 });
        }
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                actual: data.len(),
            });
        }
        Ok(Self { dim, data })
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        Self { dim, data }
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = Complex64::new(d, 0.0);
        }
        m
    }

    /// Builds a matrix from nested rows; panics on ragged input.
    pub fn from_rows(rows: &[&[Complex64]]) -> Self {
        let dim = rows.len();
        Self::from_fn(dim, |i, j| {
            assert_eq!(rows[i].len(), dim, "ragged row {i}");
            rows[i][j]
        })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|&x| x * c).collect(),
        }
    }

    pub fn scale_real(&self, c: f64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|&x| x * c).collect(),
        }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    /// `Tr(self * other)` without forming the product.
    pub fn trace_of_product(&self, other: &Self) -> Complex64 {
        debug_assert_eq!(self.dim, other.dim);
        let n = self.dim;
        let mut acc = ZERO;
        for i in 0..n {
            for k in 0..n {
                acc += self.data[i * n + k] * other.data[k * n + i];
            }
        }
        acc
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|x| x.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `max_ij |M_ij - conj(M_ji)|`.
    pub fn hermiticity_error(&self) -> f64 {
        let n = self.dim;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// `max_ij |M_ij + conj(M_ji)|`.
    pub fn anti_hermiticity_error(&self) -> f64 {
        let n = self.dim;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self[(i, j)] + self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, rel_tol: f64) -> bool {
        self.hermiticity_error() <= rel_tol * self.max_abs()
    }

    pub fn kron(&self, other: &Self) -> Self {
        let (n, m) = (self.dim, other.dim);
        Self::from_fn(n * m, |i, j| self[(i / m, j / m)] * other[(i % m, j % m)])
    }

    /// `self * other - other * self`.
    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.dim).map(|i| self[(i, j)]).collect()
    }

    /// Columns `cols` as an `n x cols.len()` block, row-major.
    pub(crate) fn column_block(&self, cols: &[usize]) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(self.dim * cols.len());
        for i in 0..self.dim {
            for &j in cols {
                out.push(self[(i, j)]);
            }
        }
        out
    }

    fn to_nalgebra(&self) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.dim, self.dim, |i, j| self[(i, j)])
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.dim + j]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "matrix dimensions differ");
        let n = self.dim;
        let mut out = vec![ZERO; n * n];
        for i in 0..n {
            let row = &self.data[i * n..(i + 1) * n];
            let out_row = &mut out[i * n..(i + 1) * n];
            for (k, &a) in row.iter().enumerate() {
                if a == ZERO {
                    continue;
                }
                let rhs_row = &rhs.data[k * n..(k + 1) * n];
                for (o, &b) in out_row.iter_mut().zip(rhs_row) {
                    *o += a * b;
                }
            }
        }
        ComplexMatrix { dim: n, data: out }
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "matrix dimensions differ");
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "matrix dimensions differ");
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn neg(self) -> ComplexMatrix {
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().map(|a| -a).collect(),
        }
    }
}

impl AddAssign<&ComplexMatrix> for ComplexMatrix {
    fn add_assign(&mut self, rhs: &ComplexMatrix) {
        assert_eq!(self.dim, rhs.dim, "matrix dimensions differ");
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
    }
}

impl SubAssign<&ComplexMatrix> for ComplexMatrix {
    fn sub_assign(&mut self, rhs: &ComplexMatrix) {
        assert_eq!(self.dim, rhs.dim, "matrix dimensions differ");
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a -= b;
        }
    }
}

/// Pauli matrices `[sigma_1, sigma_2, sigma_3]`.
pub fn pauli() -> [ComplexMatrix; 3] {
    let o = ZERO;
    [
        ComplexMatrix::from_rows(&[&[o, ONE], &[ONE, o]]),
        ComplexMatrix::from_rows(&[&[o, -I], &[I, o]]),
        ComplexMatrix::from_rows(&[&[ONE, o], &[o, -ONE]]),
    ]
}

/// Eigenvalues in ascending order with an orthonormal eigenbasis and its
/// partition into degenerate clusters.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    /// Column `j` is the eigenvector of `eigenvalues[j]`.
    pub eigenvectors: ComplexMatrix,
    /// Contiguous index ranges of degenerate clusters, in ascending order.
    pub groups: Vec<Range<usize>>,
    pub tolerance: f64,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn group_of(&self, index: usize) -> usize {
        self.groups
            .iter()
            .position(|g| g.contains(&index))
            .expect("groups partition the spectrum")
    }

    /// Group index of every eigenvalue.
    pub fn group_labels(&self) -> Vec<usize> {
        let mut labels = vec![0; self.dim()];
        for (g, range) in self.groups.iter().enumerate() {
            for i in range.clone() {
                labels[i] = g;
            }
        }
        labels
    }

    /// `V^dagger M V`: the matrix elements of `m` in the eigenbasis.
    pub fn to_eigenbasis(&self, m: &ComplexMatrix) -> ComplexMatrix {
        let v = &self.eigenvectors;
        &(&v.adjoint() * m) * v
    }

    /// `V M V^dagger`: back from the eigenbasis.
    pub fn from_eigenbasis(&self, m: &ComplexMatrix) -> ComplexMatrix {
        let v = &self.eigenvectors;
        &(v * m) * &v.adjoint()
    }

    /// `V f(diag(lambda)) V^dagger`.
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let diag: Vec<f64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        self.from_eigenbasis(&ComplexMatrix::from_real_diagonal(&diag))
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.apply(|l| l)
    }

    /// Orthogonal projector onto the span of eigenvectors `indices`.
    pub fn projector(&self, indices: Range<usize>) -> ComplexMatrix {
        let n = self.dim();
        let v = &self.eigenvectors;
        ComplexMatrix::from_fn(n, |i, j| {
            indices.clone().map(|k| v[(i, k)] * v[(j, k)].conj()).sum()
        })
    }
}

/// Diagonalizes a Hermitian matrix.
///
/// Eigenvalues come back ascending; each eigenvector has its largest-modulus
/// component (first one on ties) rotated to the positive real axis. Clusters
/// open a new group whenever an eigenvalue exceeds the group's first member by
/// more than `degeneracy_tol * (1 + max|lambda|)`.
pub fn hermitian_eig(m: &ComplexMatrix, degeneracy_tol: f64) -> Result<SpectralDecomposition> {
    let scale = m.max_abs();
    let asymmetry = m.hermiticity_error();
    let limit = HERMITIAN_TOL * scale;
    if asymmetry > limit {
        return Err(Error::NonHermitianInput { asymmetry, limit });
    }

    let (values, vectors) = if m.dim() <= JACOBI_MAX_DIM {
        jacobi(m)?
    } else {
        tridiagonal_qr(m)?
    };

    let n = m.dim();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));

    let eigenvalues: Vec<f64> = order.iter().map(|&k| values[k]).collect();
    let mut eigenvectors = ComplexMatrix::zeros(n);
    for (col, &k) in order.iter().enumerate() {
        let mut best = 0;
        let mut best_abs = -1.0;
        for i in 0..n {
            let a = vectors[(i, k)].norm();
            if a > best_abs {
                best_abs = a;
                best = i;
            }
        }
        let phase = if best_abs > 0.0 {
            vectors[(best, k)].conj() / best_abs
        } else {
            ONE
        };
        for i in 0..n {
            eigenvectors[(i, col)] = vectors[(i, k)] * phase;
        }
        eigenvectors[(best, col)] = Complex64::new(eigenvectors[(best, col)].norm(), 0.0);
    }

    let groups = degeneracy_groups(&eigenvalues, degeneracy_tol);
    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors,
        groups,
        tolerance: degeneracy_tol,
    })
}

fn degeneracy_groups(sorted: &[f64], tol: f64) -> Vec<Range<usize>> {
    let scale = 1.0 + sorted.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let mut groups = Vec::new();
    let mut start = 0;
    for i in 1..sorted.len() {
        if sorted[i] - sorted[start] > tol * scale {
            groups.push(start..i);
            start = i;
        }
    }
    groups.push(start..sorted.len());
    groups
}

fn jacobi(m: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    let n = m.dim();
    let mut a = m.clone();
    for i in 0..n {
        a[(i, i)] = Complex64::new(a[(i, i)].re, 0.0);
    }
    let mut v = ComplexMatrix::identity(n);

    for sweep in 0..JACOBI_MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += a[(p, q)].norm_sqr();
            }
        }
        if off == 0.0 {
            return Ok(((0..n).map(|i| a[(i, i)].re).collect(), v));
        }

        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let abs = apq.norm();
                if abs == 0.0 {
                    continue;
                }
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let g = 100.0 * abs;
                if sweep > 4 && app.abs() + g == app.abs() && aqq.abs() + g == aqq.abs() {
                    a[(p, q)] = ZERO;
                    a[(q, p)] = ZERO;
                    continue;
                }

                let theta = (aqq - app) / (2.0 * abs);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let phase = (apq / abs).conj();
                // U = diag(1, e^{-i alpha}) * [[c, s], [-s, c]]
                let u00 = Complex64::new(c, 0.0);
                let u01 = Complex64::new(s, 0.0);
                let u10 = phase * (-s);
                let u11 = phase * c;

                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * u00 + akq * u10;
                    a[(k, q)] = akp * u01 + akq * u11;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = u00.conj() * apk + u10.conj() * aqk;
                    a[(q, k)] = u01.conj() * apk + u11.conj() * aqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * u00 + vkq * u10;
                    v[(k, q)] = vkp * u01 + vkq * u11;
                }
                a[(p, q)] = ZERO;
                a[(q, p)] = ZERO;
                a[(p, p)] = Complex64::new(app - t * abs, 0.0);
                a[(q, q)] = Complex64::new(aqq + t * abs, 0.0);
            }
        }
    }
    Err(Error::ConvergenceFailure {
        sweeps: JACOBI_MAX_SWEEPS,
    })
}

fn tridiagonal_qr(m: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    let n = m.dim();
    let eig = SymmetricEigen::try_new(m.to_nalgebra(), f64::EPSILON, QR_MAX_ITERATIONS)
        .ok_or(Error::ConvergenceFailure {
            sweeps: QR_MAX_ITERATIONS,
        })?;
    let values = eig.eigenvalues.iter().copied().collect();
    let vectors = ComplexMatrix::from_fn(n, |i, j| eig.eigenvectors[(i, j)]);
    Ok((values, vectors))
}

/// Unique positive semidefinite square root.
///
/// Eigenvalues in `[-PSD_CLAMP * max(1, max|lambda|), 0)` are clamped to zero.
pub fn psd_sqrt(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let spec = hermitian_eig(m, DEFAULT_DEGENERACY_TOL)?;
    psd_sqrt_from(&spec)
}

pub(crate) fn psd_sqrt_from(spec: &SpectralDecomposition) -> Result<ComplexMatrix> {
    let scale = spec
        .eigenvalues
        .iter()
        .map(|l| l.abs())
        .fold(1.0, f64::max);
    if let Some(&worst) = spec.eigenvalues.first() {
        if worst < -PSD_CLAMP * scale {
            return Err(Error::IndefiniteInput { eigenvalue: worst });
        }
    }
    Ok(spec.apply(|l| l.max(0.0).sqrt()))
}

/// `exp(A)` for anti-Hermitian `A`, through the spectrum of `iA`.
pub fn unitary_exp(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    Ok(UnitaryExp::new(a)?.value())
}

/// Spectral data of an anti-Hermitian generator, reusable for `exp(A)` and
/// its directional (Frechet) derivatives.
#[derive(Clone, Debug)]
pub struct UnitaryExp {
    spectrum: SpectralDecomposition,
}

impl UnitaryExp {
    pub fn new(a: &ComplexMatrix) -> Result<Self> {
        let deviation = a.anti_hermiticity_error();
        let limit = HERMITIAN_TOL * a.max_abs().max(1.0);
        if deviation > limit {
            return Err(Error::NonAntiHermitianInput { deviation, limit });
        }
        // iA is Hermitian up to the roundoff tolerated above; symmetrize it.
        let ia = a.scale(I);
        let herm = (&ia + &ia.adjoint()).scale_real(0.5);
        Ok(Self {
            spectrum: hermitian_eig(&herm, DEFAULT_DEGENERACY_TOL)?,
        })
    }

    /// `exp(A) = V diag(e^{-i mu}) V^dagger` where `iA = V diag(mu) V^dagger`.
    pub fn value(&self) -> ComplexMatrix {
        let n = self.spectrum.dim();
        let mut d = ComplexMatrix::zeros(n);
        for (k, &mu) in self.spectrum.eigenvalues.iter().enumerate() {
            d[(k, k)] = Complex64::from_polar(1.0, -mu);
        }
        self.spectrum.from_eigenbasis(&d)
    }

    /// Derivative of `exp(A + s E)` at `s = 0` for anti-Hermitian `E`.
    pub fn derivative(&self, e: &ComplexMatrix) -> ComplexMatrix {
        let mu = &self.spectrum.eigenvalues;
        let mut tilde = self.spectrum.to_eigenbasis(e);
        let n = mu.len();
        for j in 0..n {
            for k in 0..n {
                // (e^{g_j} - e^{g_k}) / (g_j - g_k) with g = -i mu, written as
                // e^{(g_j + g_k)/2} sinc((mu_j - mu_k)/2) to stay stable.
                let half = 0.5 * (mu[j] - mu[k]);
                let sinc = if half.abs() < 1e-8 {
                    1.0 - half * half / 6.0
                } else {
                    half.sin() / half
                };
                tilde[(j, k)] *= Complex64::from_polar(sinc, -0.5 * (mu[j] + mu[k]));
            }
        }
        self.spectrum.from_eigenbasis(&tilde)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_hermitian(n: usize, entries: &[f64]) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(n);
        let mut it = entries.iter().cycle();
        for i in 0..n {
            m[(i, i)] = c(*it.next().unwrap(), 0.0);
            for j in i + 1..n {
                let z = c(*it.next().unwrap(), *it.next().unwrap());
                m[(i, j)] = z;
                m[(j, i)] = z.conj();
            }
        }
        m
    }

    fn check_decomposition(m: &ComplexMatrix, spec: &SpectralDecomposition) {
        let v = &spec.eigenvectors;
        let gram = &v.adjoint() * v;
        assert!(gram.max_abs_diff(&ComplexMatrix::identity(m.dim())) < 1e-10);
        let lmax = spec.eigenvalues.iter().map(|l| l.abs()).fold(0.0, f64::max);
        assert!(spec.reconstruct().max_abs_diff(m) <= 1e-10 * (1.0 + lmax));
        assert!(spec.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn pauli_z_spectrum() {
        let [_, _, s3] = pauli();
        let spec = hermitian_eig(&s3, DEFAULT_DEGENERACY_TOL).unwrap();
        assert_eq!(spec.eigenvalues, vec![-1.0, 1.0]);
        assert_eq!(spec.eigenvectors.column(0), vec![ZERO, ONE]);
        assert_eq!(spec.eigenvectors.column(1), vec![ONE, ZERO]);
        assert_eq!(spec.groups, vec![0..1, 1..2]);
    }

    #[test]
    fn two_level_energies_are_plus_minus_r() {
        let [_, _, s3] = pauli();
        let spec = hermitian_eig(&s3.scale_real(2.0), DEFAULT_DEGENERACY_TOL).unwrap();
        assert_eq!(spec.eigenvalues, vec![-2.0, 2.0]);
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = ComplexMatrix::from_rows(&[&[ONE, ONE], &[ZERO, ONE]]);
        assert!(matches!(
            hermitian_eig(&m, DEFAULT_DEGENERACY_TOL),
            Err(Error::NonHermitianInput { .. })
        ));
    }

    #[test]
    fn one_by_one() {
        let m = ComplexMatrix::from_real_diagonal(&[3.5]);
        let spec = hermitian_eig(&m, DEFAULT_DEGENERACY_TOL).unwrap();
        assert_eq!(spec.eigenvalues, vec![3.5]);
        assert_eq!(spec.groups, vec![0..1]);
    }

    #[test]
    fn groups_degenerate_pairs() {
        let m = ComplexMatrix::from_real_diagonal(&[1.0, -1.0, 1.0, -1.0]);
        let spec = hermitian_eig(&m, DEFAULT_DEGENERACY_TOL).unwrap();
        assert_eq!(spec.groups, vec![0..2, 2..4]);
    }

    #[test]
    fn large_dimension_uses_fallback_and_stays_accurate() {
        let n = 40;
        let entries: Vec<f64> = (0..n * n).map(|k| ((k * 7919) % 1013) as f64 / 1013.0 - 0.5).collect();
        let m = random_hermitian(n, &entries);
        let spec = hermitian_eig(&m, DEFAULT_DEGENERACY_TOL).unwrap();
        check_decomposition(&m, &spec);
    }

    #[test]
    fn psd_sqrt_examples() {
        let m = ComplexMatrix::from_real_diagonal(&[4.0, 9.0]);
        let r = psd_sqrt(&m).unwrap();
        assert!(r.max_abs_diff(&ComplexMatrix::from_real_diagonal(&[2.0, 3.0])) < 1e-14);
        let id = ComplexMatrix::identity(3);
        assert!(psd_sqrt(&id).unwrap().max_abs_diff(&id) < 1e-14);
    }

    #[test]
    fn psd_sqrt_of_two_level_thermal_state() {
        // lambda_pm = (1 -+ tanh 1) / 2 at beta R = 1, rotated off-axis.
        let t = 1.0f64.tanh();
        let lm = 0.5 * (1.0 - t);
        let lp = 0.5 * (1.0 + t);
        let [s1, _, s3] = pauli();
        let nhat = (&s1.scale_real(0.6) + &s3.scale_real(0.8)).scale_real(-t);
        let rho = (&ComplexMatrix::identity(2) + &nhat).scale_real(0.5);
        let root = psd_sqrt(&rho).unwrap();
        let spec = hermitian_eig(&root, DEFAULT_DEGENERACY_TOL).unwrap();
        assert!((spec.eigenvalues[0] - lm.sqrt()).abs() < 1e-14);
        assert!((spec.eigenvalues[1] - lp.sqrt()).abs() < 1e-14);
        assert!((&root * &root).max_abs_diff(&rho) < 1e-14);
    }

    #[test]
    fn psd_sqrt_clamps_roundoff_and_rejects_indefinite() {
        let m = ComplexMatrix::from_real_diagonal(&[1.0, -1e-13]);
        let r = psd_sqrt(&m).unwrap();
        assert_eq!(r[(1, 1)], ZERO);
        let bad = ComplexMatrix::from_real_diagonal(&[1.0, -1e-6]);
        assert!(matches!(psd_sqrt(&bad), Err(Error::IndefiniteInput { .. })));
    }

    #[test]
    fn unitary_exp_examples() {
        let z = ComplexMatrix::zeros(3);
        assert!(unitary_exp(&z).unwrap().max_abs_diff(&ComplexMatrix::identity(3)) < 1e-15);

        let [s1, _, _] = pauli();
        let a = s1.scale(I * std::f64::consts::FRAC_PI_2);
        let u = unitary_exp(&a).unwrap();
        assert!(u.max_abs_diff(&s1.scale(I)) < 1e-14);

        let herm = s1.clone();
        assert!(matches!(
            unitary_exp(&herm),
            Err(Error::NonAntiHermitianInput { .. })
        ));
    }

    #[test]
    fn unitary_exp_of_truncated_displacement_generator() {
        let n = 40;
        let z = c(0.3, 0.0);
        let mut g = ComplexMatrix::zeros(n);
        for k in 1..n {
            let s = (k as f64).sqrt();
            g[(k, k - 1)] += z * s; // z a^dagger
            g[(k - 1, k)] -= z.conj() * s; // -conj(z) a
        }
        let u = unitary_exp(&g).unwrap();
        let err = (&u.adjoint() * &u).max_abs_diff(&ComplexMatrix::identity(n));
        assert!(err <= 1e-10, "unitarity error {err:e}");
    }

    #[test]
    fn exp_derivative_matches_finite_difference() {
        let [s1, s2, s3] = pauli();
        let a = (&s1.scale(c(0.0, 0.7)) + &s3.scale(c(0.0, -0.4))).kron(&ComplexMatrix::identity(2));
        let e = s2.scale(I).kron(&s1);
        let a = &a + &ComplexMatrix::identity(2).kron(&s3.scale(c(0.0, 0.2)));
        let exp = UnitaryExp::new(&a).unwrap();
        let h = 1e-5;
        let plus = unitary_exp(&(&a + &e.scale_real(h))).unwrap();
        let minus = unitary_exp(&(&a - &e.scale_real(h))).unwrap();
        let fd = (&plus - &minus).scale_real(0.5 / h);
        assert!(exp.derivative(&e).max_abs_diff(&fd) < 1e-9);
    }

    #[test]
    fn decomposition_is_bitwise_deterministic() {
        let entries = [0.3, -1.2, 0.5, 0.25, 0.9, -0.4, 0.1, 0.05, 2.0, -0.7];
        let m = random_hermitian(4, &entries);
        let a = hermitian_eig(&m, DEFAULT_DEGENERACY_TOL).unwrap();
        let b = hermitian_eig(&m, DEFAULT_DEGENERACY_TOL).unwrap();
        assert_eq!(a, b);
    }

    proptest! {
        #[test]
        fn reconstruction_and_unitarity(
            n in 1usize..=8,
            entries in prop::collection::vec(-3.0f64..3.0, 64),
        ) {
            let m = random_hermitian(n, &entries);
            let spec = hermitian_eig(&m, DEFAULT_DEGENERACY_TOL).unwrap();
            check_decomposition(&m, &spec);
        }

        #[test]
        fn groups_partition_the_spectrum(
            n in 1usize..=8,
            entries in prop::collection::vec(-1.0f64..1.0, 64),
            tol in 1e-12f64..0.5,
        ) {
            let m = random_hermitian(n, &entries);
            let spec = hermitian_eig(&m, tol).unwrap();
            let mut next = 0;
            let scale = 1.0 + spec.eigenvalues.iter().map(|l| l.abs()).fold(0.0, f64::max);
            for g in &spec.groups {
                prop_assert_eq!(g.start, next);
                prop_assert!(g.end > g.start);
                let spread = spec.eigenvalues[g.end - 1] - spec.eigenvalues[g.start];
                prop_assert!(spread <= tol * scale);
                next = g.end;
            }
            prop_assert_eq!(next, n);
        }

        #[test]
        fn psd_sqrt_is_idempotent_on_squares(
            n in 1usize..=6,
            entries in prop::collection::vec(-1.0f64..1.0, 64),
        ) {
            let b = random_hermitian(n, &entries);
            let m = &b * &b;
            let r = psd_sqrt(&m).unwrap();
            let rr = psd_sqrt(&(&r * &r)).unwrap();
            prop_assert!(rr.max_abs_diff(&r) < 1e-9);
            prop_assert!((&r * &r).max_abs_diff(&m) <= 1e-10 * m.max_abs().max(1.0));
        }
    }
}
