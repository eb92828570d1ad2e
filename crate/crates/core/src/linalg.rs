//! Small dense complex matrices (2x2 and 4x4) and the handful of Hermitian
//! operations the correlation measures need: eigendecomposition by cyclic
//! Jacobi rotations, PSD square root, partial trace and von Neumann entropy.
//!
//! Two-qubit matrices use the product basis `|00>, |01>, |10>, |11>` with
//! qubit A as the most significant index.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Hermiticity tolerance accepted by the eigensolver.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Eigenvalues in `(-NEG_EIG_TOL, 0)` are rounding noise and clamp to zero.
pub const NEG_EIG_TOL: f64 = 1e-10;
/// Jacobi sweeps stop once the off-diagonal Frobenius norm drops below this.
const JACOBI_OFF_TOL: f64 = 1e-14;
const JACOBI_MAX_SWEEPS: usize = 64;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Square complex matrix of fixed dimension, row-major.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Matrix<const N: usize> {
    entries: [[C64; N]; N],
}

pub type Mat2 = Matrix<2>;
pub type Mat4 = Matrix<4>;

impl<const N: usize> Matrix<N> {
    pub const DIM: usize = N;

    pub fn zeros() -> Self {
        Self {
            entries: [[ZERO; N]; N],
        }
    }

    pub fn identity() -> Self {
        let mut m = Self::zeros();
        for i in 0..N {
            m.entries[i][i] = ONE;
        }
        m
    }

    pub fn from_rows(entries: [[C64; N]; N]) -> Self {
        Self { entries }
    }

    pub fn from_real_rows(rows: [[f64; N]; N]) -> Self {
        let mut m = Self::zeros();
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                m.entries[i][j] = C64::new(v, 0.0);
            }
        }
        m
    }

    pub fn from_diag(diag: [f64; N]) -> Self {
        let mut m = Self::zeros();
        for (i, &d) in diag.iter().enumerate() {
            m.entries[i][i] = C64::new(d, 0.0);
        }
        m
    }

    /// `|v><v|`
    pub fn projector(v: &[C64; N]) -> Self {
        let mut m = Self::zeros();
        for i in 0..N {
            for j in 0..N {
                m.entries[i][j] = v[i] * v[j].conj();
            }
        }
        m
    }

    pub fn rows(&self) -> &[[C64; N]; N] {
        &self.entries
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Self::zeros();
        for i in 0..N {
            for j in 0..N {
                m.entries[i][j] = self.entries[j][i].conj();
            }
        }
        m
    }

    pub fn conj(&self) -> Self {
        let mut m = *self;
        m.entries
            .iter_mut()
            .flatten()
            .for_each(|z| *z = z.conj());
        m
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut m = *self;
        m.entries.iter_mut().flatten().for_each(|z| *z *= s);
        m
    }

    pub fn trace(&self) -> C64 {
        (0..N).map(|i| self.entries[i][i]).sum()
    }

    pub fn diagonal(&self) -> [f64; N] {
        let mut d = [0.0; N];
        for (i, di) in d.iter_mut().enumerate() {
            *di = self.entries[i][i].re;
        }
        d
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.entries
            .iter()
            .flatten()
            .zip(other.entries.iter().flatten())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of `self - self^dagger`.
    pub fn hermiticity_deviation(&self) -> f64 {
        self.max_abs_diff(&self.adjoint())
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries
            .iter()
            .flatten()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn column(&self, j: usize) -> [C64; N] {
        let mut c = [ZERO; N];
        for (i, ci) in c.iter_mut().enumerate() {
            *ci = self.entries[i][j];
        }
        c
    }

    pub fn apply(&self, v: &[C64; N]) -> [C64; N] {
        let mut out = [ZERO; N];
        for (i, oi) in out.iter_mut().enumerate() {
            *oi = (0..N).map(|j| self.entries[i][j] * v[j]).sum();
        }
        out
    }

    /// `U diag(values) U^dagger` for a matrix whose columns are the eigenvectors.
    pub fn from_spectrum(vectors: &Self, values: &[f64; N]) -> Self {
        let mut m = Self::zeros();
        for i in 0..N {
            for j in 0..N {
                m.entries[i][j] = (0..N)
                    .map(|k| vectors.entries[i][k] * values[k] * vectors.entries[j][k].conj())
                    .sum();
            }
        }
        m
    }
}

impl Mat2 {
    /// Kronecker product `self ⊗ other`, with `self` acting on qubit A.
    pub fn kron(&self, other: &Mat2) -> Mat4 {
        let mut m = Mat4::zeros();
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        m[(2 * i + k, 2 * j + l)] = self[(i, j)] * other[(k, l)];
                    }
                }
            }
        }
        m
    }
}

impl<const N: usize> Index<(usize, usize)> for Matrix<N> {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.entries[i][j]
    }
}

impl<const N: usize> IndexMut<(usize, usize)> for Matrix<N> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.entries[i][j]
    }
}

impl<const N: usize> Mul for Matrix<N> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        &self * &rhs
    }
}

impl<const N: usize> Mul for &Matrix<N> {
    type Output = Matrix<N>;
    fn mul(self, rhs: Self) -> Matrix<N> {
        let mut m = Matrix::zeros();
        for i in 0..N {
            for k in 0..N {
                let a = self.entries[i][k];
                if a == ZERO {
                    continue;
                }
                for j in 0..N {
                    m.entries[i][j] += a * rhs.entries[k][j];
                }
            }
        }
        m
    }
}

impl<const N: usize> Add for Matrix<N> {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        for (a, b) in self.entries.iter_mut().flatten().zip(rhs.entries.iter().flatten()) {
            *a += b;
        }
        self
    }
}

impl<const N: usize> Sub for Matrix<N> {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        for (a, b) in self.entries.iter_mut().flatten().zip(rhs.entries.iter().flatten()) {
            *a -= b;
        }
        self
    }
}

/// Eigenvalues in descending order with the matching unit eigenvectors as
/// the columns of `vectors`.
#[derive(Clone, Debug)]
pub struct Eigensystem<const N: usize> {
    pub values: [f64; N],
    pub vectors: Matrix<N>,
}

/// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi rotations.
pub fn hermitian_eigensystem<const N: usize>(m: &Matrix<N>) -> Result<Eigensystem<N>> {
    let deviation = m.hermiticity_deviation();
    if deviation > HERMITIAN_TOL || !deviation.is_finite() {
        return Err(Error::NotHermitian { deviation });
    }

    // Work on the exactly Hermitian part so rotations see a consistent matrix.
    let mut a = Matrix::<N>::zeros();
    for i in 0..N {
        a.entries[i][i] = C64::new(m.entries[i][i].re, 0.0);
        for j in (i + 1)..N {
            let z = 0.5 * (m.entries[i][j] + m.entries[j][i].conj());
            a.entries[i][j] = z;
            a.entries[j][i] = z.conj();
        }
    }
    let mut v = Matrix::<N>::identity();
    let scale = a.frobenius_norm().max(1.0);

    let mut converged = false;
    for _ in 0..JACOBI_MAX_SWEEPS {
        if off_diagonal_norm(&a) < JACOBI_OFF_TOL * scale {
            converged = true;
            break;
        }
        for p in 0..N {
            for q in (p + 1)..N {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }
    if !converged && off_diagonal_norm(&a) >= JACOBI_OFF_TOL * scale {
        return Err(Error::Numerical(format!(
            "Jacobi iteration did not converge (off-diagonal norm {:.3e})",
            off_diagonal_norm(&a)
        )));
    }

    let mut order: [usize; N] = std::array::from_fn(|i| i);
    order.sort_by(|&i, &j| a.entries[j][j].re.total_cmp(&a.entries[i][i].re));
    let values = std::array::from_fn(|k| a.entries[order[k]][order[k]].re);
    let mut vectors = Matrix::<N>::zeros();
    for (k, &col) in order.iter().enumerate() {
        for i in 0..N {
            vectors.entries[i][k] = v.entries[i][col];
        }
    }
    Ok(Eigensystem { values, vectors })
}

fn off_diagonal_norm<const N: usize>(a: &Matrix<N>) -> f64 {
    let mut s = 0.0;
    for i in 0..N {
        for j in 0..N {
            if i != j {
                s += a.entries[i][j].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// One Jacobi step annihilating `a[p][q]`: `a <- J^dagger a J`, `v <- v J`.
fn rotate<const N: usize>(a: &mut Matrix<N>, v: &mut Matrix<N>, p: usize, q: usize) {
    let apq = a.entries[p][q];
    let r = apq.norm();
    if r == 0.0 {
        return;
    }
    // Remove the phase of a[p][q], then a real symmetric rotation.
    let phase = apq / r;
    let app = a.entries[p][p].re;
    let aqq = a.entries[q][q].re;
    let tau = (aqq - app) / (2.0 * r);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    // Columns p and q of J.
    let jpp = C64::new(c, 0.0);
    let jpq = C64::new(s, 0.0);
    let jqp = -phase.conj() * s;
    let jqq = phase.conj() * c;

    // a <- a J (columns)
    for k in 0..N {
        let akp = a.entries[k][p];
        let akq = a.entries[k][q];
        a.entries[k][p] = akp * jpp + akq * jqp;
        a.entries[k][q] = akp * jpq + akq * jqq;
    }
    // a <- J^dagger a (rows)
    for k in 0..N {
        let apk = a.entries[p][k];
        let aqk = a.entries[q][k];
        a.entries[p][k] = jpp.conj() * apk + jqp.conj() * aqk;
        a.entries[q][k] = jpq.conj() * apk + jqq.conj() * aqk;
    }
    a.entries[p][q] = ZERO;
    a.entries[q][p] = ZERO;
    a.entries[p][p].im = 0.0;
    a.entries[q][q].im = 0.0;

    for k in 0..N {
        let vkp = v.entries[k][p];
        let vkq = v.entries[k][q];
        v.entries[k][p] = vkp * jpp + vkq * jqp;
        v.entries[k][q] = vkp * jpq + vkq * jqq;
    }
}

/// Clamps rounding-level negative eigenvalues to zero; anything more
/// negative than `-NEG_EIG_TOL` is reported.
pub fn clamp_spectrum<const N: usize>(values: &mut [f64; N]) -> Result<()> {
    for x in values.iter_mut() {
        if *x < -NEG_EIG_TOL {
            return Err(Error::NotPositive { eigenvalue: *x });
        }
        if *x < 0.0 {
            *x = 0.0;
        }
    }
    Ok(())
}

/// Principal square root of a Hermitian positive semidefinite matrix.
pub fn matrix_sqrt_psd<const N: usize>(m: &Matrix<N>) -> Result<Matrix<N>> {
    let Eigensystem { mut values, vectors } = hermitian_eigensystem(m)?;
    clamp_spectrum(&mut values)?;
    let roots = values.map(f64::sqrt);
    Ok(Matrix::from_spectrum(&vectors, &roots))
}

/// `-x log2 x` with the `0 log 0 = 0` convention.
#[inline]
pub fn entropy_term(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        -x * x.log2()
    }
}

/// Shannon entropy in bits of a probability vector.
pub fn shannon_entropy(probs: &[f64]) -> f64 {
    probs.iter().copied().map(entropy_term).sum()
}

/// Entropy in bits of the binary distribution `((1 - r)/2, (1 + r)/2)`.
pub fn binary_entropy_of_bloch(r: f64) -> f64 {
    entropy_term(0.5 * (1.0 - r)) + entropy_term(0.5 * (1.0 + r))
}

/// Von Neumann entropy `-Tr rho log2 rho` in bits.
pub fn von_neumann_entropy<const N: usize>(rho: &Matrix<N>) -> Result<f64> {
    let trace = rho.trace();
    if (trace.re - 1.0).abs() > 1e-9 || trace.im.abs() > 1e-9 {
        return Err(Error::TraceNotUnit { trace: trace.re });
    }
    let mut values = hermitian_eigensystem(rho)?.values;
    clamp_spectrum(&mut values)?;
    Ok(shannon_entropy(&values))
}

/// Which qubit of a two-qubit state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Subsystem {
    A,
    B,
}

/// Two-qubit density matrix: Hermitian, unit trace and positive semidefinite.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityMatrix4(Mat4);

impl DensityMatrix4 {
    pub const HERMITIAN_TOL: f64 = 1e-12;
    pub const TRACE_TOL: f64 = 1e-12;

    /// Validates `m` against the density-matrix invariants.
    pub fn new(m: Mat4) -> Result<Self> {
        let deviation = m.hermiticity_deviation();
        if deviation > Self::HERMITIAN_TOL || !deviation.is_finite() {
            return Err(Error::NotHermitian { deviation });
        }
        let trace = m.trace();
        if (trace.re - 1.0).abs() > Self::TRACE_TOL {
            return Err(Error::TraceNotUnit { trace: trace.re });
        }
        let min = hermitian_eigensystem(&m)?.values[3];
        if min < -NEG_EIG_TOL {
            return Err(Error::NotPositive { eigenvalue: min });
        }
        Ok(Self(m))
    }

    /// Pure-state projector `|psi><psi|` after normalizing `psi`.
    pub fn from_pure(psi: [C64; 4]) -> Result<Self> {
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidParameter("zero state vector".into()));
        }
        let psi = psi.map(|z| z / norm);
        Self::new(Mat4::projector(&psi))
    }

    pub fn product(rho_a: &Mat2, rho_b: &Mat2) -> Result<Self> {
        Self::new(rho_a.kron(rho_b))
    }

    pub fn matrix(&self) -> &Mat4 {
        &self.0
    }

    pub fn into_matrix(self) -> Mat4 {
        self.0
    }

    /// `rho_ij` in the `|1>..|4>` labelling of the product basis (1-based).
    pub fn element(&self, i: usize, j: usize) -> C64 {
        self.0[(i - 1, j - 1)]
    }

    pub fn eigenvalues(&self) -> Result<[f64; 4]> {
        let mut values = hermitian_eigensystem(&self.0)?.values;
        clamp_spectrum(&mut values)?;
        Ok(values)
    }

    pub fn partial_trace(&self, keep: Subsystem) -> Mat2 {
        partial_trace(self, keep)
    }

    pub fn entropy(&self) -> Result<f64> {
        von_neumann_entropy(&self.0)
    }
}

/// Reduced state of one qubit.
pub fn partial_trace(rho: &DensityMatrix4, keep: Subsystem) -> Mat2 {
    let m = rho.matrix();
    let mut out = Mat2::zeros();
    for i in 0..2 {
        for j in 0..2 {
            out[(i, j)] = (0..2)
                .map(|k| match keep {
                    Subsystem::A => m[(2 * i + k, 2 * j + k)],
                    Subsystem::B => m[(2 * k + i, 2 * k + j)],
                })
                .sum();
        }
    }
    out
}
