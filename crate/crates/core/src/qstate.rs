//! Two-qubit states in the fixed product basis
//! `|1⟩ = |0_A 0_B⟩, |2⟩ = |0_A 1_B⟩, |3⟩ = |1_A 0_B⟩, |4⟩ = |1_A 1_B⟩`.
//!
//! Flat index `2·a + b` (0-based) corresponds to the basis label `a`, `b`
//! of cavity A and cavity B, so `rho[(1, 2)]` is `ρ₂₃` in one-based notation.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, hermitian_eigenvalues, Mat4, Spectrum, DIM, HERMITIAN_TOL};

/// Complex amplitude / matrix entry.
pub type ComplexScalar = Complex64;

/// Tolerance on `Σ|a_i|² = 1` for the strict pure-state constructor.
pub const NORM_TOL: f64 = 1e-9;
/// Tolerance on `tr ρ = 1`.
pub const TRACE_TOL: f64 = 1e-9;
/// Most negative eigenvalue accepted for a density matrix.
pub const POSITIVITY_TOL: f64 = 1e-8;

/// Normalized pure state `a₁|1⟩ + a₂|2⟩ + a₃|3⟩ + a₄|4⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PureState {
    a: [ComplexScalar; DIM],
}

fn norm_sqr(a: &[ComplexScalar; DIM]) -> Result<f64> {
    if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(a.iter().map(|z| z.norm_sqr()).sum())
}

impl PureState {
    /// Strict constructor: the amplitudes must already be normalized.
    pub fn new(a1: ComplexScalar, a2: ComplexScalar, a3: ComplexScalar, a4: ComplexScalar) -> Result<Self> {
        let a = [a1, a2, a3, a4];
        let n2 = norm_sqr(&a)?;
        if n2 <= f64::MIN_POSITIVE {
            return Err(Error::ZeroNorm);
        }
        if (n2 - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm_sq: n2 });
        }
        Ok(PureState { a })
    }

    /// Divides the amplitudes by their norm.
    pub fn normalized(a1: ComplexScalar, a2: ComplexScalar, a3: ComplexScalar, a4: ComplexScalar) -> Result<Self> {
        let a = [a1, a2, a3, a4];
        let n2 = norm_sqr(&a)?;
        if n2 <= f64::MIN_POSITIVE {
            return Err(Error::ZeroNorm);
        }
        let n = n2.sqrt();
        Ok(PureState { a: a.map(|z| z / n) })
    }

    /// Real-amplitude shorthand for [`PureState::new`].
    pub fn from_real(a: [f64; DIM]) -> Result<Self> {
        let [a1, a2, a3, a4] = a.map(|x| Complex64::new(x, 0.0));
        Self::new(a1, a2, a3, a4)
    }

    /// `a₂|01⟩ + a₃|10⟩` with real nonnegative `a₂ = amp`, `a₃ = √(1−amp²)`.
    pub fn noon(amp: f64) -> Result<Self> {
        Self::from_real([0.0, amp, partner(amp)?, 0.0])
    }

    /// `a₁|00⟩ + a₄|11⟩` with real nonnegative `a₁ = amp`, `a₄ = √(1−amp²)`.
    pub fn phi(amp: f64) -> Result<Self> {
        Self::from_real([amp, 0.0, 0.0, partner(amp)?])
    }

    pub fn amplitudes(&self) -> [ComplexScalar; DIM] {
        self.a
    }

    pub fn amplitude(&self, i: usize) -> ComplexScalar {
        self.a[i]
    }

    /// Multiplies amplitude `i` by `e^{iθ_i}`.
    pub fn with_phases(&self, theta: [f64; DIM]) -> Self {
        let mut a = self.a;
        for (z, t) in a.iter_mut().zip(theta) {
            *z *= Complex64::from_polar(1.0, t);
        }
        PureState { a }
    }
}

fn partner(amp: f64) -> Result<f64> {
    if !amp.is_finite() {
        return Err(Error::NonFinite);
    }
    if !(0.0..=1.0).contains(&amp) {
        return Err(Error::NotNormalized { norm_sq: amp * amp });
    }
    Ok((1.0 - amp * amp).max(0.0).sqrt())
}

/// Free-function form of [`PureState::new`].
pub fn pure_state(a1: ComplexScalar, a2: ComplexScalar, a3: ComplexScalar, a4: ComplexScalar) -> Result<PureState> {
    PureState::new(a1, a2, a3, a4)
}

/// Validated two-qubit density matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix {
    m: Mat4,
}

impl DensityMatrix {
    /// Checks Hermiticity, unit trace and positivity.
    pub fn new(m: Mat4) -> Result<Self> {
        if !m.is_finite() {
            return Err(Error::NonFinite);
        }
        let deviation = m.hermitian_deviation();
        if deviation > HERMITIAN_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        let trace = m.trace().re;
        if (trace - 1.0).abs() > TRACE_TOL {
            return Err(Error::BadTrace { trace });
        }
        let spec = hermitian_eigenvalues(&m)?;
        if spec.min() < -POSITIVITY_TOL {
            return Err(Error::NotPositive {
                min_eigenvalue: spec.min(),
            });
        }
        Ok(DensityMatrix { m })
    }

    /// Wraps a matrix produced by a trusted propagator. Only the Hermitian
    /// part is kept; no other invariant is checked.
    pub(crate) fn from_trusted(m: Mat4) -> Self {
        DensityMatrix { m: m.hermitian_part() }
    }

    /// Diagonal density matrix with the given populations.
    pub fn diagonal(p: [f64; DIM]) -> Result<Self> {
        Self::new(Mat4::diag(p))
    }

    pub fn maximally_mixed() -> Self {
        DensityMatrix {
            m: Mat4::identity().scale(0.25),
        }
    }

    pub fn matrix(&self) -> &Mat4 {
        &self.m
    }

    pub fn into_matrix(self) -> Mat4 {
        self.m
    }

    /// Entry `(i, j)` with 0-based indices.
    pub fn get(&self, i: usize, j: usize) -> ComplexScalar {
        self.m[(i, j)]
    }

    pub fn populations(&self) -> [f64; DIM] {
        [
            self.m[(0, 0)].re,
            self.m[(1, 1)].re,
            self.m[(2, 2)].re,
            self.m[(3, 3)].re,
        ]
    }

    pub fn trace(&self) -> f64 {
        self.m.trace().re
    }

    /// tr(ρ²)
    pub fn purity(&self) -> f64 {
        (self.m * self.m).trace().re
    }

    pub fn spectrum(&self) -> Result<Spectrum> {
        hermitian_eigenvalues(&self.m)
    }

    /// Factor `W` with `ρ = W W†`, columns `√p_k v_k` from the eigen-decomposition.
    /// Negative round-off eigenvalues are dropped.
    pub fn factor(&self) -> Result<Mat4> {
        let eig = hermitian_eigen(&self.m)?;
        let roots = eig.values.map(|p| p.max(0.0).sqrt());
        Ok(Mat4::from_fn(|i, k| eig.vectors[(i, k)] * roots[k]))
    }
}

/// `ρ = |ψ⟩⟨ψ|`
pub fn density_from_pure(psi: &PureState) -> DensityMatrix {
    let a = psi.amplitudes();
    DensityMatrix {
        m: Mat4::from_fn(|i, j| a[i] * a[j].conj()),
    }
}

/// Partial transpose on cavity B: `⟨i_A j_B|ρ^T_B|k_A l_B⟩ = ⟨i_A l_B|ρ|k_A j_B⟩`.
pub fn partial_transpose_b(m: &Mat4) -> Mat4 {
    Mat4::from_fn(|row, col| {
        let (i, j) = (row / 2, row % 2);
        let (k, l) = (col / 2, col % 2);
        m[(2 * i + l, 2 * k + j)]
    })
}
