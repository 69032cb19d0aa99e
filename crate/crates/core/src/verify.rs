//! Oracle suites behind `esd verify`: closed-form propagator against RK4,
//! X-state shortcuts against the general measures, and agreement of the
//! two measures on which states are entangled.

use rand::Rng;
use rayon::prelude::*;

use crate::analysis::ZERO_TOL;
use crate::dynamics::{evolve_analytic_matrix, evolve_rk4_substeps, SymmetricParams, TimeGrid};
use crate::error::Result;
use crate::linalg::Mat4;
use crate::measures::{concurrence, concurrence_x, log_negativity, log_negativity_x};
use crate::qstate::{density_from_pure, DensityMatrix};
use crate::sampling::{random_density_matrix, random_pure_state, random_x_state, seeded_rng, XKind};

pub const ANALYTIC_VS_RK4_TOL: f64 = 1e-6;
pub const T0_IDENTITY_TOL: f64 = 1e-12;
pub const CLOSED_FORM_TOL: f64 = 1e-9;

/// Closed-form propagator under test: `(rho0, params, t) -> rho(t)`.
pub type AnalyticFn = dyn Fn(&Mat4, &SymmetricParams, f64) -> Mat4 + Sync;

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Random pure states for the propagator check.
    pub trials: usize,
    pub nbars: Vec<f64>,
    pub gamma: f64,
    /// Horizon in units of 1/γ.
    pub gamma_t_end: f64,
    /// RK4 step in units of 1/γ.
    pub gamma_step: f64,
    /// Compared samples per trajectory.
    pub checkpoints: usize,
    /// Random X-states (and as many general states) per pure-state trial.
    pub states_per_trial: usize,
}

impl VerifyOptions {
    pub fn new(seed: u64, trials: usize) -> Self {
        VerifyOptions {
            seed,
            trials,
            nbars: vec![0.0, 0.1, 0.5],
            gamma: 1.0,
            gamma_t_end: 10.0,
            gamma_step: 1e-3,
            checkpoints: 100,
            states_per_trial: 10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyReport {
    pub max_analytic_vs_rk4: f64,
    pub max_t0_deviation: f64,
    pub max_closed_vs_general: f64,
    pub zero_set_agree: usize,
    pub zero_set_total: usize,
}

impl VerifyReport {
    pub fn propagators_agree(&self) -> bool {
        self.max_analytic_vs_rk4 <= ANALYTIC_VS_RK4_TOL && self.max_t0_deviation <= T0_IDENTITY_TOL
    }

    pub fn closed_forms_agree(&self) -> bool {
        self.max_closed_vs_general <= CLOSED_FORM_TOL
    }

    pub fn zero_sets_agree(&self) -> bool {
        self.zero_set_agree == self.zero_set_total
    }

    pub fn passed(&self) -> bool {
        self.propagators_agree() && self.closed_forms_agree() && self.zero_sets_agree()
    }
}

/// Max elementwise deviation between `analytic` and RK4 for one initial
/// state, plus the `t = 0` deviation.
pub fn compare_propagators(
    rho0: &DensityMatrix,
    p: &SymmetricParams,
    opts: &VerifyOptions,
    analytic: &AnalyticFn,
) -> Result<(f64, f64)> {
    let t_end = opts.gamma_t_end / p.gamma;
    let grid = TimeGrid::new(0.0, t_end, opts.checkpoints.max(1))?;
    let substeps = (grid.step() * p.gamma / opts.gamma_step).round().max(1.0) as usize;
    let traj = evolve_rk4_substeps(rho0, &p.reservoir(), &grid, substeps)?;
    let max_dev = traj
        .samples
        .iter()
        .map(|s| analytic(rho0.matrix(), p, s.t).max_abs_diff(s.rho.matrix()))
        .fold(0.0, f64::max);
    let t0 = analytic(rho0.matrix(), p, 0.0).max_abs_diff(rho0.matrix());
    Ok((max_dev, t0))
}

fn x_kind(i: usize) -> XKind {
    if i.is_multiple_of(2) {
        XKind::Coherence23
    } else {
        XKind::Coherence14
    }
}

/// Deviation of both X-state shortcuts from the general measures.
pub fn closed_form_deviation(rho: &DensityMatrix) -> Result<f64> {
    let dc = (concurrence_x(rho)? - concurrence(rho)?).abs();
    let dn = (log_negativity_x(rho)? - log_negativity(rho)?).abs();
    Ok(dc.max(dn))
}

/// Whether `C > ZERO_TOL` and `𝒩 > ZERO_TOL` agree.
pub fn zero_set_agrees(rho: &DensityMatrix) -> Result<bool> {
    Ok((concurrence(rho)? > ZERO_TOL) == (log_negativity(rho)? > ZERO_TOL))
}

pub fn run_verification(opts: &VerifyOptions, analytic: &AnalyticFn) -> Result<VerifyReport> {
    let mut rng = seeded_rng(opts.seed);
    let pure: Vec<DensityMatrix> = (0..opts.trials)
        .map(|_| density_from_pure(&random_pure_state(&mut rng)))
        .collect();
    let n_states = opts.trials * opts.states_per_trial;
    let x_states = (0..n_states)
        .map(|i| random_x_state(&mut rng, x_kind(i)))
        .collect::<Result<Vec<_>>>()?;
    let mixed = (0..n_states)
        .map(|_| {
            let rank = rng.random_range(1..=4);
            random_density_matrix(&mut rng, rank)
        })
        .collect::<Result<Vec<_>>>()?;

    let params = opts
        .nbars
        .iter()
        .map(|&n| SymmetricParams::new(opts.gamma, n))
        .collect::<Result<Vec<_>>>()?;
    let jobs: Vec<(&DensityMatrix, &SymmetricParams)> =
        pure.iter().flat_map(|r| params.iter().map(move |p| (r, p))).collect();
    let deviations = jobs
        .par_iter()
        .map(|(rho0, p)| compare_propagators(rho0, p, opts, analytic))
        .collect::<Result<Vec<_>>>()?;
    let (max_analytic_vs_rk4, max_t0_deviation) = deviations
        .iter()
        .fold((0.0_f64, 0.0_f64), |(a, b), (x, y)| (a.max(*x), b.max(*y)));

    let max_closed_vs_general = x_states
        .par_iter()
        .map(closed_form_deviation)
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);

    let agreement = x_states
        .par_iter()
        .chain(mixed.par_iter())
        .map(zero_set_agrees)
        .collect::<Result<Vec<_>>>()?;

    Ok(VerifyReport {
        max_analytic_vs_rk4,
        max_t0_deviation,
        max_closed_vs_general,
        zero_set_agree: agreement.iter().filter(|&&ok| ok).count(),
        zero_set_total: agreement.len(),
    })
}

/// The shipped closed-form propagator as an [`AnalyticFn`].
pub fn shipped_analytic(rho0: &Mat4, p: &SymmetricParams, t: f64) -> Mat4 {
    evolve_analytic_matrix(rho0, p, t)
}
