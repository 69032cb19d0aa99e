//! Seeded random states for property checks and the verification suite.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::error::Result;
use crate::linalg::Mat4;
use crate::measures::x_state;
use crate::qstate::{DensityMatrix, PureState};

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian_complex<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
}

/// Haar-random pure state.
pub fn random_pure_state<R: Rng + ?Sized>(rng: &mut R) -> PureState {
    loop {
        let a: [Complex64; 4] = std::array::from_fn(|_| gaussian_complex(rng));
        if let Ok(psi) = PureState::normalized(a[0], a[1], a[2], a[3]) {
            return psi;
        }
    }
}

/// Which coherences a random X-state carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XKind {
    /// Only `ρ₂₃`.
    Coherence23,
    /// Only `ρ₁₄`.
    Coherence14,
    Both,
}

/// Random X-state: flat-Dirichlet populations, coherence moduli uniform
/// in the range allowed by positivity, uniform phases.
pub fn random_x_state<R: Rng + ?Sized>(rng: &mut R, kind: XKind) -> Result<DensityMatrix> {
    let w: [f64; 4] = std::array::from_fn(|_| Exp1.sample(rng));
    let total: f64 = w.iter().sum();
    let p = w.map(|x| x / total);
    let mut coherence = |bound: f64| {
        let r = rng.random::<f64>() * bound;
        Complex64::from_polar(r, rng.random::<f64>() * std::f64::consts::TAU)
    };
    let zero = Complex64::new(0.0, 0.0);
    let (c23, c14) = match kind {
        XKind::Coherence23 => (coherence((p[1] * p[2]).sqrt()), zero),
        XKind::Coherence14 => (zero, coherence((p[0] * p[3]).sqrt())),
        XKind::Both => {
            let c23 = coherence((p[1] * p[2]).sqrt());
            (c23, coherence((p[0] * p[3]).sqrt()))
        }
    };
    x_state(p, c23, c14)
}

/// Random mixed state `G G† / tr(G G†)` with a 4×`rank` complex Gaussian `G`.
pub fn random_density_matrix<R: Rng + ?Sized>(rng: &mut R, rank: usize) -> Result<DensityMatrix> {
    let rank = rank.clamp(1, 4);
    let g = Mat4::from_fn(|_, j| {
        if j < rank {
            gaussian_complex(rng)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let m = g * g.adjoint();
    let tr = m.trace().re;
    DensityMatrix::new(m.scale(1.0 / tr))
}
