//! Time evolution of the two-cavity density matrix.
//!
//! Each cavity is a qubit (0 or 1 photon) coupled to its own thermal
//! reservoir with decay rate `γ` and mean photon number `n̄`. The equations
//! of motion close on the 4×4 matrix; [`lindblad_rhs`] writes them out entry
//! by entry. Two propagators are provided:
//!
//! * [`evolve_rk4`]: fixed-step classic Runge–Kutta for arbitrary
//!   (possibly different) cavity parameters;
//! * [`evolve_analytic`]: closed-form solution for identical cavities,
//!   written in terms of `a = 2n̄ + 1` and `η = aγ`.
//!
//! The two are independent and are checked against each other in the test
//! suites and by `esd verify`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::Mat4;
use crate::qstate::{DensityMatrix, TRACE_TOL};

/// Largest allowed `h · max(η_A, η_B)` for one RK4 step.
pub const MAX_STEP_ETA: f64 = 0.05;
/// Tolerance of the `t = 0` transcription self-test of the closed forms.
pub const SELF_TEST_TOL: f64 = 1e-12;

/// Reservoir parameters for the two cavities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReservoirParams {
    pub gamma_a: f64,
    pub gamma_b: f64,
    pub nbar_a: f64,
    pub nbar_b: f64,
}

fn check_rate(name: &str, v: f64) -> Result<()> {
    if !v.is_finite() || v <= 0.0 {
        return Err(Error::InvalidParams(format!("{name} must be finite and > 0, got {v}")));
    }
    Ok(())
}

fn check_nbar(name: &str, v: f64) -> Result<()> {
    if !v.is_finite() || v < 0.0 {
        return Err(Error::InvalidParams(format!("{name} must be finite and >= 0, got {v}")));
    }
    Ok(())
}

impl ReservoirParams {
    pub fn new(gamma_a: f64, gamma_b: f64, nbar_a: f64, nbar_b: f64) -> Result<Self> {
        check_rate("gamma_a", gamma_a)?;
        check_rate("gamma_b", gamma_b)?;
        check_nbar("nbar_a", nbar_a)?;
        check_nbar("nbar_b", nbar_b)?;
        Ok(ReservoirParams {
            gamma_a,
            gamma_b,
            nbar_a,
            nbar_b,
        })
    }

    pub fn symmetric(gamma: f64, nbar: f64) -> Result<Self> {
        Self::new(gamma, gamma, nbar, nbar)
    }

    /// `η_A = (2n̄_A + 1)γ_A`
    pub fn eta_a(&self) -> f64 {
        (2.0 * self.nbar_a + 1.0) * self.gamma_a
    }

    pub fn eta_b(&self) -> f64 {
        (2.0 * self.nbar_b + 1.0) * self.gamma_b
    }

    pub fn eta_max(&self) -> f64 {
        self.eta_a().max(self.eta_b())
    }

    /// `Some` when both cavities share the same rate and photon number.
    pub fn as_symmetric(&self) -> Option<SymmetricParams> {
        (self.gamma_a == self.gamma_b && self.nbar_a == self.nbar_b).then_some(SymmetricParams {
            gamma: self.gamma_a,
            nbar: self.nbar_a,
        })
    }
}

/// Identical-cavity parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetricParams {
    pub gamma: f64,
    pub nbar: f64,
}

impl SymmetricParams {
    pub fn new(gamma: f64, nbar: f64) -> Result<Self> {
        check_rate("gamma", gamma)?;
        check_nbar("nbar", nbar)?;
        Ok(SymmetricParams { gamma, nbar })
    }

    pub fn vacuum(gamma: f64) -> Result<Self> {
        Self::new(gamma, 0.0)
    }

    /// `a = 2n̄ + 1`
    pub fn a(&self) -> f64 {
        2.0 * self.nbar + 1.0
    }

    /// `η = aγ`
    pub fn eta(&self) -> f64 {
        self.a() * self.gamma
    }

    pub fn reservoir(&self) -> ReservoirParams {
        ReservoirParams {
            gamma_a: self.gamma,
            gamma_b: self.gamma,
            nbar_a: self.nbar,
            nbar_b: self.nbar,
        }
    }
}

impl From<SymmetricParams> for ReservoirParams {
    fn from(p: SymmetricParams) -> Self {
        p.reservoir()
    }
}

/// Uniform grid `t_start + k·h`, `k = 0..=steps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub t_start: f64,
    pub t_end: f64,
    pub steps: usize,
}

impl TimeGrid {
    pub fn new(t_start: f64, t_end: f64, steps: usize) -> Result<Self> {
        if !t_start.is_finite() || !t_end.is_finite() {
            return Err(Error::InvalidGrid("endpoints must be finite".into()));
        }
        if t_end <= t_start {
            return Err(Error::InvalidGrid(format!(
                "t_end ({t_end}) must exceed t_start ({t_start})"
            )));
        }
        if steps == 0 {
            return Err(Error::InvalidGrid("steps must be ≥ 1".into()));
        }
        Ok(TimeGrid { t_start, t_end, steps })
    }

    pub fn step(&self) -> f64 {
        (self.t_end - self.t_start) / self.steps as f64
    }

    pub fn time(&self, k: usize) -> f64 {
        if k == self.steps {
            self.t_end
        } else {
            self.t_start + k as f64 * self.step()
        }
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.steps).map(|k| self.time(k))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Analytic,
    Rk4,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub rho: DensityMatrix,
}

/// Time-ordered states of one run.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub params: ReservoirParams,
    pub method: Method,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.t)
    }

    pub fn last(&self) -> Option<&Sample> {
        self.samples.last()
    }
}

/// dρ/dt for the two-cavity thermal master equation, entry by entry.
pub fn lindblad_rhs_matrix(rho: &Mat4, p: &ReservoirParams) -> Mat4 {
    let (ga, gb, na, nb) = (p.gamma_a, p.gamma_b, p.nbar_a, p.nbar_b);
    let r = |i: usize, j: usize| rho[(i - 1, j - 1)];
    let mut d = Mat4::zeros();
    let mut set = |i: usize, j: usize, v: Complex64| d[(i - 1, j - 1)] = v;

    set(
        1,
        1,
        -(na * ga + nb * gb) * r(1, 1) + (na + 1.0) * ga * r(3, 3) + (nb + 1.0) * gb * r(2, 2),
    );
    set(
        1,
        2,
        -(0.5 * (2.0 * nb + 1.0) * gb + na * ga) * r(1, 2) + (na + 1.0) * ga * r(3, 4),
    );
    set(
        1,
        3,
        -(0.5 * (2.0 * na + 1.0) * ga + nb * gb) * r(1, 3) + (nb + 1.0) * gb * r(2, 4),
    );
    set(1, 4, -((na + 0.5) * ga + (nb + 0.5) * gb) * r(1, 4));

    set(
        2,
        1,
        -(0.5 * (2.0 * nb + 1.0) * gb + na * ga) * r(2, 1) + (na + 1.0) * ga * r(4, 3),
    );
    set(
        2,
        2,
        -(na * ga + (nb + 1.0) * gb) * r(2, 2) + (na + 1.0) * ga * r(4, 4) + nb * gb * r(1, 1),
    );
    set(2, 3, -((na + 0.5) * ga + (nb + 0.5) * gb) * r(2, 3));
    set(2, 4, -((nb + 1.0) * gb + (na + 0.5) * ga) * r(2, 4) + nb * gb * r(1, 3));

    set(
        3,
        1,
        -(0.5 * (2.0 * na + 1.0) * ga + nb * gb) * r(3, 1) + (nb + 1.0) * gb * r(4, 2),
    );
    set(3, 2, -((na + 0.5) * ga + (nb + 0.5) * gb) * r(3, 2));
    set(
        3,
        3,
        -((na + 1.0) * ga + nb * gb) * r(3, 3) + na * ga * r(1, 1) + (nb + 1.0) * gb * r(4, 4),
    );
    set(3, 4, -((na + 1.0) * ga + (nb + 0.5) * gb) * r(3, 4) + na * ga * r(1, 2));

    set(4, 1, -((na + 0.5) * ga + (nb + 0.5) * gb) * r(4, 1));
    set(4, 2, -((na + 0.5) * ga + (nb + 1.0) * gb) * r(4, 2) + nb * gb * r(3, 1));
    set(4, 3, -((na + 1.0) * ga + (nb + 0.5) * gb) * r(4, 3) + na * ga * r(2, 1));
    set(
        4,
        4,
        -((na + 1.0) * ga + (nb + 1.0) * gb) * r(4, 4) + na * ga * r(2, 2) + nb * gb * r(3, 3),
    );
    d
}

pub fn lindblad_rhs(rho: &DensityMatrix, p: &ReservoirParams) -> Mat4 {
    lindblad_rhs_matrix(rho.matrix(), p)
}

fn rk4_step(rho: &Mat4, p: &ReservoirParams, h: f64) -> Mat4 {
    let k1 = lindblad_rhs_matrix(rho, p);
    let k2 = lindblad_rhs_matrix(&(*rho + k1.scale(0.5 * h)), p);
    let k3 = lindblad_rhs_matrix(&(*rho + k2.scale(0.5 * h)), p);
    let k4 = lindblad_rhs_matrix(&(*rho + k3.scale(h)), p);
    let incr = (k1 + k2.scale(2.0) + k3.scale(2.0) + k4).scale(h / 6.0);
    (*rho + incr).hermitian_part()
}

fn check_step(h: f64, p: &ReservoirParams) -> Result<()> {
    let h_eta = h * p.eta_max();
    if h_eta > MAX_STEP_ETA {
        return Err(Error::StepTooLarge {
            h_eta,
            limit: MAX_STEP_ETA,
        });
    }
    Ok(())
}

/// One RK4 step per grid interval; every grid point is recorded.
pub fn evolve_rk4(rho0: &DensityMatrix, p: &ReservoirParams, grid: &TimeGrid) -> Result<Trajectory> {
    evolve_rk4_substeps(rho0, p, grid, 1)
}

/// Like [`evolve_rk4`] but with `substeps` RK4 steps between recorded
/// grid points.
pub fn evolve_rk4_substeps(
    rho0: &DensityMatrix,
    p: &ReservoirParams,
    grid: &TimeGrid,
    substeps: usize,
) -> Result<Trajectory> {
    let substeps = substeps.max(1);
    let h = grid.step() / substeps as f64;
    check_step(h, p)?;

    let trace0 = rho0.trace();
    let mut rho = *rho0.matrix();
    let mut samples = Vec::with_capacity(grid.steps + 1);
    samples.push(Sample {
        t: grid.t_start,
        rho: *rho0,
    });
    for k in 1..=grid.steps {
        for _ in 0..substeps {
            rho = rk4_step(&rho, p, h);
        }
        let drift = (rho.trace().re - trace0).abs();
        if drift > TRACE_TOL {
            return Err(Error::TraceDrift { drift });
        }
        samples.push(Sample {
            t: grid.time(k),
            rho: DensityMatrix::new(rho)?,
        });
    }
    Ok(Trajectory {
        samples,
        params: *p,
        method: Method::Rk4,
    })
}

/// Closed-form propagator for identical cavities, on raw matrices.
///
/// Populations use only the real diagonal of `rho0`; `ρ₄₄` is fixed by
/// unit trace.
pub fn evolve_analytic_matrix(rho0: &Mat4, p: &SymmetricParams, t: f64) -> Mat4 {
    let a = p.a();
    let eta = p.eta();
    let e1 = (-eta * t).exp();
    let e2 = (-2.0 * eta * t).exp();
    let e_half = (-0.5 * eta * t).exp();
    let e_3half = (-1.5 * eta * t).exp();

    let r = |i: usize, j: usize| rho0[(i - 1, j - 1)];
    let (r11, r22, r33) = (r(1, 1).re, r(2, 2).re, r(3, 3).re);
    let s = 2.0 * r11 + r22 + r33 - 1.0;
    let inv4a2 = 1.0 / (4.0 * a * a);

    let p11 = inv4a2
        * ((-2.0 + 2.0 * a * s) * (1.0 + a) * e1
            + (1.0 + a * a * (1.0 - 2.0 * r33 - 2.0 * r22) - 2.0 * a * s) * e2
            + (1.0 + a) * (1.0 + a));
    let p22 = inv4a2
        * ((-1.0 + a * a * (2.0 * r22 + 2.0 * r33 - 1.0) + 2.0 * a * s) * e2
            + (2.0 + 2.0 * a * a * (r22 - r33) - 2.0 * a * s) * e1
            + (a * a - 1.0));
    let p33 = inv4a2
        * ((-1.0 + a * a * (2.0 * r22 + 2.0 * r33 - 1.0) + 2.0 * a * s) * e2
            + (2.0 + 2.0 * a * a * (r33 - r22) - 2.0 * a * s) * e1
            + (a * a - 1.0));
    // 1 − ρ₁₁ − ρ₂₂ − ρ₃₃ collected by exponential, so it cannot cancel to
    // rounding noise when ρ₄₄ is tiny
    let r44 = r(4, 4).re;
    let p44 = inv4a2
        * ((a - 1.0) * (a - 1.0)
            + 2.0 * (a - 1.0) * (a * (r22 + r33 + 2.0 * r44 - 1.0) + 1.0) * e1
            + ((a - 1.0) * (a - 1.0) + 4.0 * a * r44 - 2.0 * a * (a - 1.0) * (r22 + r33)) * e2);

    let inv2a = 1.0 / (2.0 * a);
    let (r12, r13, r24, r34) = (r(1, 2), r(1, 3), r(2, 4), r(3, 4));
    let c12 = ((a * (r12 - r34) - r34 - r12) * e_3half + (r34 + r12) * (1.0 + a) * e_half) * inv2a;
    let c13 = ((a * (r13 - r24) - r24 - r13) * e_3half + (r24 + r13) * (1.0 + a) * e_half) * inv2a;
    let c14 = r(1, 4) * e1;
    let c23 = r(2, 3) * e1;
    let c24 = ((a * (r24 - r13) + r24 + r13) * e_3half + (r24 + r13) * (a - 1.0) * e_half) * inv2a;
    let c34 = ((a * (r34 - r12) + r34 + r12) * e_3half + (r34 + r12) * (a - 1.0) * e_half) * inv2a;

    let mut m = Mat4::diag([p11, p22, p33, p44]);
    for ((i, j), v) in [
        ((0, 1), c12),
        ((0, 2), c13),
        ((0, 3), c14),
        ((1, 2), c23),
        ((1, 3), c24),
        ((2, 3), c34),
    ] {
        m[(i, j)] = v;
        m[(j, i)] = v.conj();
    }
    m
}

/// Closed-form state at time `t ≥ 0` for identical cavities.
pub fn evolve_analytic(rho0: &DensityMatrix, p: &SymmetricParams, t: f64) -> DensityMatrix {
    DensityMatrix::from_trusted(evolve_analytic_matrix(rho0.matrix(), p, t))
}

/// `t → ∞` limit of the closed forms.
pub fn steady_state(p: &SymmetricParams) -> DensityMatrix {
    let a = p.a();
    let p11 = ((1.0 + a) / (2.0 * a)).powi(2);
    let p23 = (a * a - 1.0) / (4.0 * a * a);
    let p44 = ((a - 1.0) / (2.0 * a)).powi(2);
    DensityMatrix::from_trusted(Mat4::diag([p11, p23, p23, p44]))
}

/// Checks that the closed forms return `rho0` at `t = 0`.
pub fn analytic_self_test(rho0: &DensityMatrix, p: &SymmetricParams) -> Result<()> {
    let deviation = evolve_analytic_matrix(rho0.matrix(), p, 0.0).max_abs_diff(rho0.matrix());
    // ρ₄₄ is reconstructed from unit trace, so allow the input's own trace error
    if deviation > SELF_TEST_TOL + (rho0.trace() - 1.0).abs() {
        return Err(Error::TranscriptionSelfTest { deviation });
    }
    Ok(())
}

/// Samples [`evolve_analytic`] on every grid point. `rho0` is the state at
/// `grid.t_start`.
pub fn trajectory_analytic(rho0: &DensityMatrix, p: &SymmetricParams, grid: &TimeGrid) -> Result<Trajectory> {
    analytic_self_test(rho0, p)?;
    let samples = grid
        .times()
        .map(|t| {
            let m = evolve_analytic_matrix(rho0.matrix(), p, t - grid.t_start);
            Ok(Sample {
                t,
                rho: DensityMatrix::new(m)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Trajectory {
        samples,
        params: p.reservoir(),
        method: Method::Analytic,
    })
}

/// Anything that can produce the state at a time `t ≥ 0` from a fixed
/// initial condition.
pub trait Propagator: Sync {
    fn state_at(&self, t: f64) -> Result<DensityMatrix>;

    /// States at ascending times.
    fn states_at(&self, times: &[f64]) -> Result<Vec<DensityMatrix>> {
        times.iter().map(|&t| self.state_at(t)).collect()
    }

    fn gamma_scale(&self) -> f64;
}

/// Closed-form propagation for identical cavities.
#[derive(Debug, Clone, Copy)]
pub struct AnalyticPropagator {
    rho0: DensityMatrix,
    params: SymmetricParams,
}

impl AnalyticPropagator {
    /// Runs the `t = 0` self-test before accepting the initial state.
    pub fn new(rho0: DensityMatrix, params: SymmetricParams) -> Result<Self> {
        analytic_self_test(&rho0, &params)?;
        Ok(AnalyticPropagator { rho0, params })
    }

    pub fn params(&self) -> &SymmetricParams {
        &self.params
    }
}

impl Propagator for AnalyticPropagator {
    fn state_at(&self, t: f64) -> Result<DensityMatrix> {
        Ok(evolve_analytic(&self.rho0, &self.params, t))
    }

    fn gamma_scale(&self) -> f64 {
        self.params.gamma
    }
}

/// RK4 propagation from `t = 0` with steps no longer than `max_step`.
#[derive(Debug, Clone, Copy)]
pub struct Rk4Propagator {
    rho0: DensityMatrix,
    params: ReservoirParams,
    max_step: f64,
}

impl Rk4Propagator {
    pub fn new(rho0: DensityMatrix, params: ReservoirParams, max_step: f64) -> Result<Self> {
        if max_step.is_nan() || max_step <= 0.0 {
            return Err(Error::InvalidGrid("max_step must be > 0".into()));
        }
        check_step(max_step, &params)?;
        Ok(Rk4Propagator { rho0, params, max_step })
    }

    fn advance(&self, rho: Mat4, dt: f64) -> Mat4 {
        if dt <= 0.0 {
            return rho;
        }
        let n = (dt / self.max_step).ceil().max(1.0) as usize;
        let h = dt / n as f64;
        (0..n).fold(rho, |r, _| rk4_step(&r, &self.params, h))
    }
}

impl Propagator for Rk4Propagator {
    fn state_at(&self, t: f64) -> Result<DensityMatrix> {
        Ok(DensityMatrix::from_trusted(self.advance(*self.rho0.matrix(), t)))
    }

    fn states_at(&self, times: &[f64]) -> Result<Vec<DensityMatrix>> {
        let mut rho = *self.rho0.matrix();
        let mut now = 0.0;
        let mut out = Vec::with_capacity(times.len());
        for &t in times {
            rho = self.advance(rho, t - now);
            now = t.max(now);
            out.push(DensityMatrix::from_trusted(rho));
        }
        Ok(out)
    }

    fn gamma_scale(&self) -> f64 {
        self.params.gamma_a.max(self.params.gamma_b)
    }
}
