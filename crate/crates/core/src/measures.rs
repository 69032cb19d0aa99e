//! Two-qubit entanglement measures.
//!
//! The general routines ([`log_negativity`], [`concurrence`]) work on any
//! density matrix and never look for special structure. The X-state
//! shortcuts and the two family relations are separate functions so they
//! can serve as an independent check of the general path.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{general_eigenvalues, hermitian_eigenvalues, singular_values, Mat4, Spectrum, DIM};
use crate::qstate::{partial_transpose_b, DensityMatrix, PureState};

/// Modulus bound for entries that must vanish in an X-state.
pub const X_PATTERN_TOL: f64 = 1e-10;
/// Partial-transpose eigenvalues must be below `-NEGATIVE_EIG_TOL` to count.
pub const NEGATIVE_EIG_TOL: f64 = 1e-12;

/// Both measures for one state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurePair {
    pub log_negativity: f64,
    pub concurrence: f64,
}

pub fn measure_pair(rho: &DensityMatrix) -> Result<MeasurePair> {
    Ok(MeasurePair {
        log_negativity: log_negativity(rho)?,
        concurrence: concurrence(rho)?,
    })
}

/// `log₂(1 + 2|Σμ|)` over the negative eigenvalues `μ` of `ρ^{T_B}`.
pub fn log_negativity(rho: &DensityMatrix) -> Result<f64> {
    let spec = hermitian_eigenvalues(&partial_transpose_b(rho.matrix()))?;
    if spec.min() >= -NEGATIVE_EIG_TOL {
        return Ok(0.0);
    }
    let neg: f64 = spec.values.iter().filter(|&&v| v < 0.0).sum();
    Ok((1.0 + 2.0 * neg.abs()).log2())
}

/// `σ_y ⊗ σ_y` in the product basis.
fn sigma_yy() -> Mat4 {
    Mat4::from_real([
        [0.0, 0.0, 0.0, -1.0],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
        [-1.0, 0.0, 0.0, 0.0],
    ])
}

/// `ρ̃ = (σ_y ⊗ σ_y) ρ* (σ_y ⊗ σ_y)`
pub fn spin_flip(rho: &Mat4) -> Mat4 {
    let y = sigma_yy();
    y * rho.conj() * y
}

/// Eigenvalues of the non-Hermitian product `ρ ρ̃`, sorted descending.
pub fn wootters_spectrum(rho: &DensityMatrix) -> Result<Spectrum> {
    let m = rho.matrix();
    general_eigenvalues(&(*m * spin_flip(m)))
}

/// Square roots of the eigenvalues of `ρ ρ̃`, sorted descending.
///
/// With `ρ = W W†` the nonzero eigenvalues of `ρ ρ̃` are the squared
/// singular values of `τ = Wᵀ (σ_y ⊗ σ_y) W`, so the roots come out of an
/// SVD directly and stay accurate near zero.
pub fn wootters_roots(rho: &DensityMatrix) -> Result<[f64; DIM]> {
    let w = rho.factor()?;
    let tau = w.transpose() * sigma_yy() * w;
    Ok(singular_values(&tau))
}

/// Unclamped `√λ₁ − √λ₂ − √λ₃ − √λ₄`; negative exactly when the state is
/// separable.
pub fn concurrence_witness(rho: &DensityMatrix) -> Result<f64> {
    let s = wootters_roots(rho)?;
    Ok(s[0] - s[1] - s[2] - s[3])
}

/// Wootters concurrence `max(0, √λ₁ − √λ₂ − √λ₃ − √λ₄)`.
pub fn concurrence(rho: &DensityMatrix) -> Result<f64> {
    Ok(concurrence_witness(rho)?.max(0.0))
}

/// Minus the smallest eigenvalue of `ρ^{T_B}`; positive exactly when the
/// partial transpose is not positive.
pub fn ppt_witness(rho: &DensityMatrix) -> Result<f64> {
    Ok(-hermitian_eigenvalues(&partial_transpose_b(rho.matrix()))?.min())
}

/// Concurrence evaluated from [`wootters_spectrum`] by taking square roots
/// of the product eigenvalues. Loses accuracy near degenerate zero
/// eigenvalues; kept as a cross-check for [`concurrence`].
pub fn concurrence_from_product_spectrum(rho: &DensityMatrix) -> Result<f64> {
    let spec = wootters_spectrum(rho)?;
    let r = spec.values.map(|v| v.max(0.0).sqrt());
    Ok((r[0] - r[1] - r[2] - r[3]).max(0.0))
}

fn forbidden_x_entry(rho: &DensityMatrix) -> f64 {
    [(0, 1), (0, 2), (1, 3), (2, 3)]
        .iter()
        .map(|&(i, j)| rho.get(i, j).norm())
        .fold(0.0, f64::max)
}

/// Fails with [`Error::NotXState`] unless `ρ₁₂, ρ₁₃, ρ₂₄, ρ₃₄` all vanish.
pub fn check_x_state(rho: &DensityMatrix) -> Result<()> {
    let modulus = forbidden_x_entry(rho);
    if modulus > X_PATTERN_TOL {
        return Err(Error::NotXState { modulus });
    }
    Ok(())
}

pub fn is_x_state(rho: &DensityMatrix) -> bool {
    forbidden_x_entry(rho) <= X_PATTERN_TOL
}

fn pops(rho: &DensityMatrix) -> [f64; DIM] {
    rho.populations()
}

/// Closed-form concurrence of an X-state.
pub fn concurrence_x(rho: &DensityMatrix) -> Result<f64> {
    check_x_state(rho)?;
    let [p1, p2, p3, p4] = pops(rho);
    let c23 = 2.0 * (rho.get(1, 2).norm() - (p1 * p4).max(0.0).sqrt());
    let c14 = 2.0 * (rho.get(0, 3).norm() - (p2 * p3).max(0.0).sqrt());
    Ok(c23.max(c14).max(0.0))
}

/// Closed-form logarithmic negativity of an X-state carrying only one of
/// the two coherences `ρ₂₃` or `ρ₁₄`.
pub fn log_negativity_x(rho: &DensityMatrix) -> Result<f64> {
    check_x_state(rho)?;
    let [p1, p2, p3, p4] = pops(rho);
    let c23 = rho.get(1, 2).norm();
    let c14 = rho.get(0, 3).norm();
    if c23 > X_PATTERN_TOL && c14 > X_PATTERN_TOL {
        return Err(Error::AmbiguousFamily);
    }
    let arg = if c14 > X_PATTERN_TOL {
        1.0 - p2 - p3 + ((p2 - p3).powi(2) + 4.0 * c14 * c14).sqrt()
    } else {
        1.0 - p1 - p4 + ((p1 - p4).powi(2) + 4.0 * c23 * c23).sqrt()
    };
    Ok(arg.log2().max(0.0))
}

/// Which two-amplitude family a pure state belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EprFamily {
    /// `a₂|01⟩ + a₃|10⟩`
    Noon,
    /// `a₁|00⟩ + a₄|11⟩`
    Phi,
}

impl EprFamily {
    /// Real-amplitude member with leading amplitude `amp` (`|a₂|` for
    /// NOON, `|a₁|` for Φ).
    pub fn state(self, amp: f64) -> Result<PureState> {
        match self {
            EprFamily::Noon => PureState::noon(amp),
            EprFamily::Phi => PureState::phi(amp),
        }
    }

    pub fn classify(psi: &PureState) -> Option<EprFamily> {
        let a = psi.amplitudes();
        let zero = |i: usize| a[i].norm() <= X_PATTERN_TOL;
        if zero(0) && zero(3) {
            Some(EprFamily::Noon)
        } else if zero(1) && zero(2) {
            Some(EprFamily::Phi)
        } else {
            None
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            EprFamily::Noon => "noon",
            EprFamily::Phi => "phi",
        }
    }
}

/// `C(0) = 2|a₂a₃|` or `2|a₁a₄|` and `𝒩(0) = log₂(1 + C(0))`.
pub fn initial_measures(psi: &PureState) -> Result<MeasurePair> {
    let a = psi.amplitudes();
    let c = match EprFamily::classify(psi).ok_or(Error::NotEprFamily)? {
        EprFamily::Noon => 2.0 * (a[1] * a[2]).norm(),
        EprFamily::Phi => 2.0 * (a[0] * a[3]).norm(),
    };
    Ok(MeasurePair {
        log_negativity: (1.0 + c).log2(),
        concurrence: c,
    })
}

/// Predicted `𝒩` and `C` for the NOON pattern under a vacuum bath
/// (`ρ₄₄ = 0`): `C = 2|ρ₂₃|`, `𝒩 = log₂[1 − ρ₁₁ + √(ρ₁₁² + C²)]`.
/// Returns `(predicted_n, c)`.
pub fn relation_noon_vacuum(rho: &DensityMatrix) -> Result<(f64, f64)> {
    check_x_state(rho)?;
    if rho.get(0, 3).norm() > X_PATTERN_TOL {
        return Err(Error::PatternMismatch("rho14 must vanish".into()));
    }
    let p44 = rho.get(3, 3).re;
    if p44.abs() > X_PATTERN_TOL {
        return Err(Error::PatternMismatch(format!("rho44 = {p44:e} must vanish")));
    }
    let p11 = rho.get(0, 0).re;
    let c = 2.0 * rho.get(1, 2).norm();
    let n = (1.0 - p11 + (p11 * p11 + c * c).sqrt()).log2().max(0.0);
    Ok((n, c))
}

/// Φ-family relation with `ρ₂₂ = ρ₃₃`: `C̃ = 2(|ρ₁₄| − ρ₂₂)`,
/// `C = max(0, C̃)`, `𝒩 = max(0, log₂(1 + C̃))`. Returns `(predicted_n, c)`.
pub fn relation_phi(rho: &DensityMatrix) -> Result<(f64, f64)> {
    check_x_state(rho)?;
    if rho.get(1, 2).norm() > X_PATTERN_TOL {
        return Err(Error::PatternMismatch("rho23 must vanish".into()));
    }
    let (p22, p33) = (rho.get(1, 1).re, rho.get(2, 2).re);
    if (p22 - p33).abs() > X_PATTERN_TOL {
        return Err(Error::PatternMismatch(format!(
            "rho22 = {p22} differs from rho33 = {p33}"
        )));
    }
    let c_tilde = 2.0 * (rho.get(0, 3).norm() - p22);
    let n = if c_tilde > -1.0 {
        (1.0 + c_tilde).log2().max(0.0)
    } else {
        0.0
    };
    Ok((n, c_tilde.max(0.0)))
}

/// X-state with populations `p` and coherences `ρ₂₃ = c23`, `ρ₁₄ = c14`.
pub fn x_state(p: [f64; DIM], c23: Complex64, c14: Complex64) -> Result<DensityMatrix> {
    let mut m = Mat4::diag(p);
    m[(1, 2)] = c23;
    m[(2, 1)] = c23.conj();
    m[(0, 3)] = c14;
    m[(3, 0)] = c14.conj();
    DensityMatrix::new(m)
}
