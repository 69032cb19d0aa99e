//! Fixed-size 4×4 complex linear algebra.
//!
//! Everything in this crate lives on the two-qubit space, so the matrices
//! are plain `[[Complex64; 4]; 4]` arrays and the eigensolvers are written
//! for that size only:
//!
//! * [`hermitian_eigen`]: cyclic complex Jacobi rotations.
//! * [`general_eigenvalues_complex`]: Householder reduction to Hessenberg
//!   form followed by single-shift complex QR with Wilkinson shifts.
//! * [`singular_values`]: one-sided (Hestenes) Jacobi, which keeps small
//!   singular values accurate in absolute terms.

#![allow(clippy::needless_range_loop)]

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub const DIM: usize = 4;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Residual bound for Hermitian eigenpairs, relative to ‖M‖_F.
pub const HERMITIAN_RESIDUAL_TOL: f64 = 1e-10;
/// Entrywise tolerance for accepting a matrix as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Imaginary parts and negative real parts below this are clamped to zero.
pub const CLAMP_TOL: f64 = 1e-8;

const MAX_JACOBI_SWEEPS: usize = 64;
const MAX_QR_ITERATIONS: usize = 400;

/// Dense 4×4 complex matrix, row-major.
#[derive(Clone, Copy, PartialEq)]
pub struct Mat4(pub [[Complex64; DIM]; DIM]);

impl Mat4 {
    pub const fn zeros() -> Self {
        Mat4([[ZERO; DIM]; DIM])
    }

    pub fn identity() -> Self {
        Self::from_fn(|i, j| if i == j { ONE } else { ZERO })
    }

    pub fn from_fn(mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros();
        for i in 0..DIM {
            for j in 0..DIM {
                m.0[i][j] = f(i, j);
            }
        }
        m
    }

    pub fn from_real(rows: [[f64; DIM]; DIM]) -> Self {
        Self::from_fn(|i, j| Complex64::new(rows[i][j], 0.0))
    }

    pub fn diag(d: [f64; DIM]) -> Self {
        Self::from_fn(|i, j| if i == j { Complex64::new(d[i], 0.0) } else { ZERO })
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(|i, j| self.0[j][i].conj())
    }

    pub fn conj(&self) -> Self {
        Self::from_fn(|i, j| self.0[i][j].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(|i, j| self.0[j][i])
    }

    pub fn trace(&self) -> Complex64 {
        (0..DIM).map(|i| self.0[i][i]).sum()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::from_fn(|i, j| self.0[i][j] * s)
    }

    /// (M + M†)/2
    pub fn hermitian_part(&self) -> Self {
        Self::from_fn(|i, j| (self.0[i][j] + self.0[j][i].conj()) * 0.5)
    }

    /// max |M_ij − conj(M_ji)|
    pub fn hermitian_deviation(&self) -> f64 {
        let mut dev: f64 = 0.0;
        for i in 0..DIM {
            for j in i..DIM {
                dev = dev.max((self.0[i][j] - self.0[j][i].conj()).norm());
            }
        }
        dev
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().fold(0.0_f64, |acc, z| acc.max(z.norm()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest elementwise modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &Mat4) -> f64 {
        (*self - *other).max_abs()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn column(&self, j: usize) -> [Complex64; DIM] {
        [self.0[0][j], self.0[1][j], self.0[2][j], self.0[3][j]]
    }

    pub fn mul_vec(&self, v: &[Complex64; DIM]) -> [Complex64; DIM] {
        let mut out = [ZERO; DIM];
        for (i, o) in out.iter_mut().enumerate() {
            *o = (0..DIM).map(|k| self.0[i][k] * v[k]).sum();
        }
        out
    }
}

impl Default for Mat4 {
    fn default() -> Self {
        Self::zeros()
    }
}

impl fmt::Debug for Mat4 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Mat4[")?;
        for row in &self.0 {
            write!(f, "  ")?;
            for z in row {
                write!(f, "{:+.6e}{:+.6e}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl Index<(usize, usize)> for Mat4 {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.0[i][j]
    }
}

impl IndexMut<(usize, usize)> for Mat4 {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.0[i][j]
    }
}

impl Add for Mat4 {
    type Output = Mat4;
    fn add(self, rhs: Mat4) -> Mat4 {
        Mat4::from_fn(|i, j| self.0[i][j] + rhs.0[i][j])
    }
}

impl Sub for Mat4 {
    type Output = Mat4;
    fn sub(self, rhs: Mat4) -> Mat4 {
        Mat4::from_fn(|i, j| self.0[i][j] - rhs.0[i][j])
    }
}

impl Mul for Mat4 {
    type Output = Mat4;
    fn mul(self, rhs: Mat4) -> Mat4 {
        Mat4::from_fn(|i, j| (0..DIM).map(|k| self.0[i][k] * rhs.0[k][j]).sum())
    }
}

impl Mul<Complex64> for Mat4 {
    type Output = Mat4;
    fn mul(self, rhs: Complex64) -> Mat4 {
        Mat4::from_fn(|i, j| self.0[i][j] * rhs)
    }
}

/// Four real eigenvalues sorted descending, plus the solver residual.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spectrum {
    pub values: [f64; DIM],
    pub residual: f64,
}

impl Spectrum {
    pub fn min(&self) -> f64 {
        self.values[DIM - 1]
    }

    pub fn max(&self) -> f64 {
        self.values[0]
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }
}

/// Eigen-decomposition of a Hermitian matrix: `vectors` holds the
/// eigenvectors as columns, in the same order as `values`.
#[derive(Debug, Clone, Copy)]
pub struct HermitianEigen {
    pub values: [f64; DIM],
    pub vectors: Mat4,
    pub residual: f64,
}

fn sort_desc_with<T: Copy>(values: &mut [f64; DIM], payload: &mut [T; DIM]) {
    let mut idx = [0usize, 1, 2, 3];
    idx.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    let v = *values;
    let p = *payload;
    for (k, &i) in idx.iter().enumerate() {
        values[k] = v[i];
        payload[k] = p[i];
    }
}

/// Unitary that zeroes the (p, q) entry of the Hermitian 2×2 block
/// `[[alpha, b], [conj(b), delta]]` under `U† A U`. Returned as
/// `(u_pp, u_pq, u_qp, u_qq)`.
fn jacobi_rotation(alpha: f64, delta: f64, b: Complex64) -> (Complex64, Complex64, Complex64, Complex64) {
    let beta = b.norm();
    let phase = b / beta;
    let tau = (delta - alpha) / (2.0 * beta);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    (
        Complex64::new(c, 0.0),
        Complex64::new(s, 0.0),
        -phase.conj() * s,
        phase.conj() * c,
    )
}

/// Hermitian eigen-decomposition by cyclic Jacobi rotations.
pub fn hermitian_eigen(m: &Mat4) -> Result<HermitianEigen> {
    if !m.is_finite() {
        return Err(Error::NonFinite);
    }
    let deviation = m.hermitian_deviation();
    if deviation > HERMITIAN_TOL {
        return Err(Error::NotHermitian { deviation });
    }
    let mut a = m.hermitian_part();
    let mut v = Mat4::identity();
    let scale = a.frobenius_norm();

    for _ in 0..MAX_JACOBI_SWEEPS {
        let off: f64 = (0..DIM)
            .flat_map(|p| ((p + 1)..DIM).map(move |q| (p, q)))
            .map(|(p, q)| a.0[p][q].norm_sqr())
            .sum();
        if off.sqrt() <= f64::EPSILON * 1e-3 * scale || off == 0.0 {
            break;
        }
        for p in 0..DIM {
            for q in (p + 1)..DIM {
                let b = a.0[p][q];
                if b.norm() == 0.0 {
                    continue;
                }
                let (upp, upq, uqp, uqq) = jacobi_rotation(a.0[p][p].re, a.0[q][q].re, b);
                // A <- A U (columns p, q)
                for i in 0..DIM {
                    let aip = a.0[i][p];
                    let aiq = a.0[i][q];
                    a.0[i][p] = aip * upp + aiq * uqp;
                    a.0[i][q] = aip * upq + aiq * uqq;
                    let vip = v.0[i][p];
                    let viq = v.0[i][q];
                    v.0[i][p] = vip * upp + viq * uqp;
                    v.0[i][q] = vip * upq + viq * uqq;
                }
                // A <- U† A (rows p, q)
                for j in 0..DIM {
                    let apj = a.0[p][j];
                    let aqj = a.0[q][j];
                    a.0[p][j] = upp.conj() * apj + uqp.conj() * aqj;
                    a.0[q][j] = upq.conj() * apj + uqq.conj() * aqj;
                }
                a.0[p][q] = ZERO;
                a.0[q][p] = ZERO;
                a.0[p][p].im = 0.0;
                a.0[q][q].im = 0.0;
            }
        }
    }

    let mut values = [a.0[0][0].re, a.0[1][1].re, a.0[2][2].re, a.0[3][3].re];
    let mut cols = [v.column(0), v.column(1), v.column(2), v.column(3)];
    sort_desc_with(&mut values, &mut cols);

    let herm = m.hermitian_part();
    let mut residual: f64 = 0.0;
    for (lambda, col) in values.iter().zip(cols.iter()) {
        let mv = herm.mul_vec(col);
        let r: f64 = mv
            .iter()
            .zip(col.iter())
            .map(|(x, y)| (x - y * lambda).norm_sqr())
            .sum::<f64>()
            .sqrt();
        residual = residual.max(r);
    }
    let tolerance = HERMITIAN_RESIDUAL_TOL * scale;
    if residual > tolerance {
        return Err(Error::NoConvergence { residual, tolerance });
    }

    let vectors = Mat4::from_fn(|i, j| cols[j][i]);
    Ok(HermitianEigen {
        values,
        vectors,
        residual,
    })
}

/// Real spectrum of a Hermitian matrix, sorted descending.
pub fn hermitian_eigenvalues(m: &Mat4) -> Result<Spectrum> {
    let eig = hermitian_eigen(m)?;
    Ok(Spectrum {
        values: eig.values,
        residual: eig.residual,
    })
}

/// Reduce to upper Hessenberg form with Householder reflections.
fn hessenberg(m: &Mat4) -> Mat4 {
    let mut h = *m;
    for k in 0..DIM - 2 {
        let norm: f64 = ((k + 1)..DIM).map(|i| h.0[i][k].norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let x0 = h.0[k + 1][k];
        let phase = if x0.norm() == 0.0 { ONE } else { x0 / x0.norm() };
        let alpha = -phase * norm;
        let mut v = [ZERO; DIM];
        for i in (k + 1)..DIM {
            v[i] = h.0[i][k];
        }
        v[k + 1] -= alpha;
        let vnorm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        for z in v.iter_mut() {
            *z /= vnorm;
        }
        // H <- (I − 2 v v†) H
        for j in 0..DIM {
            let dot: Complex64 = (0..DIM).map(|i| v[i].conj() * h.0[i][j]).sum();
            for i in 0..DIM {
                h.0[i][j] -= v[i] * dot * 2.0;
            }
        }
        // H <- H (I − 2 v v†)
        for i in 0..DIM {
            let dot: Complex64 = (0..DIM).map(|j| h.0[i][j] * v[j]).sum();
            for j in 0..DIM {
                h.0[i][j] -= dot * v[j].conj() * 2.0;
            }
        }
        for i in (k + 2)..DIM {
            h.0[i][k] = ZERO;
        }
    }
    h
}

/// Eigenvalue of the 2×2 block `[[a, b], [c, d]]` closest to `d`.
fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let half_tr = (a + d) * 0.5;
    let det = a * d - b * c;
    let disc = (half_tr * half_tr - det).sqrt();
    let l1 = half_tr + disc;
    let l2 = half_tr - disc;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// Complex eigenvalues of a general 4×4 matrix by shifted QR iteration.
///
/// Returns the eigenvalues in deflation order and the iteration residual:
/// the largest subdiagonal entry that was treated as zero, relative to ‖M‖_F.
pub fn general_eigenvalues_complex(m: &Mat4) -> Result<([Complex64; DIM], f64)> {
    if !m.is_finite() {
        return Err(Error::NonFinite);
    }
    let scale = m.frobenius_norm();
    let mut eig = [ZERO; DIM];
    if scale == 0.0 {
        return Ok((eig, 0.0));
    }
    let mut h = hessenberg(m);
    let mut residual: f64 = 0.0;
    let mut hi = DIM; // active block is [lo, hi)
    let mut iter = 0usize;
    let mut since_deflation = 0usize;

    while hi > 0 {
        if hi == 1 {
            eig[0] = h.0[0][0];
            break;
        }
        // find the start of the unreduced trailing block
        let mut lo = hi - 1;
        while lo > 0 {
            let sub = h.0[lo][lo - 1].norm();
            let local = h.0[lo][lo].norm() + h.0[lo - 1][lo - 1].norm();
            if sub <= f64::EPSILON * local || sub <= f64::EPSILON * 1e-2 * scale {
                residual = residual.max(sub / scale);
                h.0[lo][lo - 1] = ZERO;
                break;
            }
            lo -= 1;
        }
        if lo == hi - 1 {
            eig[hi - 1] = h.0[hi - 1][hi - 1];
            hi -= 1;
            since_deflation = 0;
            continue;
        }

        iter += 1;
        since_deflation += 1;
        if iter > MAX_QR_ITERATIONS {
            let residual = h.0[hi - 1][hi - 2].norm() / scale;
            return Err(Error::NoConvergence {
                residual,
                tolerance: f64::EPSILON,
            });
        }

        let mut shift = wilkinson_shift(
            h.0[hi - 2][hi - 2],
            h.0[hi - 2][hi - 1],
            h.0[hi - 1][hi - 2],
            h.0[hi - 1][hi - 1],
        );
        if since_deflation % 11 == 10 {
            // exceptional shift to break cycles
            shift += Complex64::new(0.75 * h.0[hi - 1][hi - 2].norm(), 0.0);
        }

        // one QR step on the block [lo, hi) via Givens rotations
        for i in lo..hi {
            h.0[i][i] -= shift;
        }
        let mut rotations = [(ZERO, ZERO); DIM];
        for k in lo..hi - 1 {
            let x = h.0[k][k];
            let y = h.0[k + 1][k];
            let r = (x.norm_sqr() + y.norm_sqr()).sqrt();
            let (c, s) = if r == 0.0 { (ONE, ZERO) } else { (x / r, y / r) };
            rotations[k] = (c, s);
            // rows k, k+1: G = [[conj(c), conj(s)], [-s, c]]
            for j in k..DIM {
                let a = h.0[k][j];
                let b = h.0[k + 1][j];
                h.0[k][j] = c.conj() * a + s.conj() * b;
                h.0[k + 1][j] = -s * a + c * b;
            }
        }
        for k in lo..hi - 1 {
            let (c, s) = rotations[k];
            // columns k, k+1: multiply by G†
            for i in 0..(k + 2).min(DIM) {
                let a = h.0[i][k];
                let b = h.0[i][k + 1];
                h.0[i][k] = a * c + b * s;
                h.0[i][k + 1] = -a * s.conj() + b * c.conj();
            }
        }
        for i in lo..hi {
            h.0[i][i] += shift;
        }
    }
    Ok((eig, residual))
}

/// Eigenvalues of a general 4×4 matrix whose spectrum is expected to be
/// real, sorted descending.
///
/// Imaginary parts up to [`CLAMP_TOL`] and negative values above
/// `-CLAMP_TOL` are set to zero. Larger imaginary parts are reported as
/// [`Error::ComplexSpectrum`].
pub fn general_eigenvalues(m: &Mat4) -> Result<Spectrum> {
    let (eig, residual) = general_eigenvalues_complex(m)?;
    let mut values = [0.0; DIM];
    for (v, z) in values.iter_mut().zip(eig.iter()) {
        if z.im.abs() > CLAMP_TOL {
            return Err(Error::ComplexSpectrum { imag: z.im.abs() });
        }
        *v = if z.re < 0.0 && z.re > -CLAMP_TOL { 0.0 } else { z.re };
    }
    values.sort_by(|a, b| b.total_cmp(a));
    Ok(Spectrum { values, residual })
}

/// Singular values by one-sided Jacobi, sorted descending.
pub fn singular_values(m: &Mat4) -> [f64; DIM] {
    // work on columns
    let mut cols = [m.column(0), m.column(1), m.column(2), m.column(3)];
    for _ in 0..MAX_JACOBI_SWEEPS {
        let mut rotated = false;
        for p in 0..DIM {
            for q in (p + 1)..DIM {
                let alpha: f64 = cols[p].iter().map(|z| z.norm_sqr()).sum();
                let beta: f64 = cols[q].iter().map(|z| z.norm_sqr()).sum();
                let gamma: Complex64 = cols[p].iter().zip(cols[q].iter()).map(|(x, y)| x.conj() * y).sum();
                if gamma.norm() <= f64::EPSILON * (alpha * beta).sqrt() || gamma.norm() == 0.0 {
                    continue;
                }
                rotated = true;
                let (upp, upq, uqp, uqq) = jacobi_rotation(alpha, beta, gamma);
                for i in 0..DIM {
                    let x = cols[p][i];
                    let y = cols[q][i];
                    cols[p][i] = x * upp + y * uqp;
                    cols[q][i] = x * upq + y * uqq;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut s = cols.map(|c| c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt());
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identity_quarter_spectrum() {
        let s = hermitian_eigenvalues(&Mat4::identity().scale(0.25)).unwrap();
        for v in s.values {
            assert_abs_diff_eq!(v, 0.25, epsilon = 1e-15);
        }
    }

    #[test]
    fn diagonal_spectrum_is_sorted() {
        let s = hermitian_eigenvalues(&Mat4::diag([0.2, 0.4, 0.1, 0.3])).unwrap();
        assert_eq!(s.values, [0.4, 0.3, 0.2, 0.1]);
        assert_eq!(s.residual, 0.0);
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut m = Mat4::identity();
        m[(0, 1)] = c(0.5, 0.0);
        assert!(matches!(hermitian_eigenvalues(&m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn complex_hermitian_pair() {
        // [[1, i], [-i, 1]] has eigenvalues 2 and 0
        let mut m = Mat4::zeros();
        m[(1, 1)] = c(1.0, 0.0);
        m[(2, 2)] = c(1.0, 0.0);
        m[(1, 2)] = c(0.0, 1.0);
        m[(2, 1)] = c(0.0, -1.0);
        let s = hermitian_eigenvalues(&m).unwrap();
        assert_abs_diff_eq!(s.values[0], 2.0, epsilon = 1e-14);
        for v in &s.values[1..] {
            assert_abs_diff_eq!(*v, 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn general_zero_matrix() {
        let s = general_eigenvalues(&Mat4::zeros()).unwrap();
        assert_eq!(s.values, [0.0; 4]);
    }

    #[test]
    fn general_rotation_is_complex() {
        // 90° rotation in a plane has eigenvalues ±i
        let mut m = Mat4::zeros();
        m[(0, 1)] = c(-1.0, 0.0);
        m[(1, 0)] = c(1.0, 0.0);
        assert!(matches!(general_eigenvalues(&m), Err(Error::ComplexSpectrum { .. })));
        let (eig, _) = general_eigenvalues_complex(&m).unwrap();
        let mut ims: Vec<f64> = eig.iter().map(|z| z.im).collect();
        ims.sort_by(f64::total_cmp);
        assert_abs_diff_eq!(ims[0], -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(ims[3], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn general_upper_triangular() {
        let m = Mat4::from_fn(|i, j| if j >= i { c((i + j + 1) as f64, 0.0) } else { ZERO });
        let s = general_eigenvalues(&m).unwrap();
        assert_abs_diff_eq!(s.values[0], 7.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.values[1], 5.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.values[2], 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.values[3], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn singular_values_of_diagonal_unitary_product() {
        let d = Mat4::diag([3.0, -2.0, 0.5, 0.0]);
        let s = singular_values(&d);
        assert_abs_diff_eq!(s[0], 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s[1], 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s[2], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(s[3], 0.0, epsilon = 1e-15);
    }

    #[test]
    fn singular_values_rank_one_are_exact_zeros() {
        let u = [c(0.3, 0.1), c(-0.2, 0.5), c(0.7, 0.0), c(0.1, -0.1)];
        let w = [c(0.5, 0.5), c(0.1, 0.0), c(0.0, -0.3), c(0.2, 0.2)];
        let m = Mat4::from_fn(|i, j| u[i] * w[j].conj());
        let s = singular_values(&m);
        let nu: f64 = u.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let nw: f64 = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        assert_abs_diff_eq!(s[0], nu * nw, epsilon = 1e-15);
        for v in &s[1..] {
            assert!(*v < 1e-15, "{v}");
        }
    }
}
