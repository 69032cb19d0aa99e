//! Entanglement sudden death detection, parameter sweeps and measure
//! comparison along trajectories.

use rayon::prelude::*;

use crate::dynamics::{AnalyticPropagator, Propagator, ReservoirParams, Rk4Propagator, SymmetricParams, Trajectory};
use crate::error::{Error, Result};
use crate::measures::{concurrence, concurrence_witness, log_negativity, measure_pair, ppt_witness, EprFamily};
use crate::qstate::{density_from_pure, DensityMatrix, PureState};

/// A measure at or below this value counts as zero entanglement.
pub const ZERO_TOL: f64 = 1e-9;
/// A sample is separable only if its witness is below minus this value.
pub const WITNESS_TOL: f64 = 1e-14;
/// Uniform samples scanned before bisection.
pub const SCAN_SAMPLES: usize = 2048;
/// Bisection stops when the bracket is shorter than this, in units of 1/γ.
pub const BISECTION_TOL_GAMMA: f64 = 1e-6;
/// Default scan horizon in units of 1/γ.
pub const DEFAULT_HORIZON_GAMMA: f64 = 20.0;
/// Largest accepted `horizon · γ`.
pub const MAX_HORIZON_GAMMA: f64 = 100.0;
/// `h · η` used when ESD detection falls back to RK4.
pub const RK4_FALLBACK_STEP_ETA: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EsdMeasure {
    Concurrence,
    LogNegativity,
}

impl EsdMeasure {
    pub fn evaluate(self, rho: &DensityMatrix) -> Result<f64> {
        match self {
            EsdMeasure::Concurrence => concurrence(rho),
            EsdMeasure::LogNegativity => log_negativity(rho),
        }
    }

    /// Unclamped separability witness: [`concurrence_witness`] or
    /// [`ppt_witness`].
    pub fn witness(self, rho: &DensityMatrix) -> Result<f64> {
        match self {
            EsdMeasure::Concurrence => concurrence_witness(rho),
            EsdMeasure::LogNegativity => ppt_witness(rho),
        }
    }

    /// `(value, dead)`. Dead needs the measure at zero and the witness
    /// clearly negative, so slow asymptotic decay below [`ZERO_TOL`] is not
    /// mistaken for sudden death.
    pub fn classify(self, rho: &DensityMatrix) -> Result<(f64, bool)> {
        let value = self.evaluate(rho)?;
        let dead = value <= ZERO_TOL && self.witness(rho)? < -WITNESS_TOL;
        Ok((value, dead))
    }

    pub fn name(self) -> &'static str {
        match self {
            EsdMeasure::Concurrence => "concurrence",
            EsdMeasure::LogNegativity => "log_negativity",
        }
    }
}

/// Outcome of a death-time search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EsdReport {
    pub death_time: Option<f64>,
    pub measure: EsdMeasure,
    pub bracket: Option<(f64, f64)>,
    pub horizon: f64,
    pub revived: bool,
}

impl EsdReport {
    pub fn bracket_width(&self) -> Option<f64> {
        self.bracket.map(|(lo, hi)| hi - lo)
    }
}

/// Scans `measure` on [`SCAN_SAMPLES`] uniform times in `[0, horizon]`,
/// finds the first sample that is dead after a positive one, and bisects
/// that transition down to `time_tol`. `revived` flags a positive sample
/// after the death.
pub fn esd_scan<P: Propagator + ?Sized>(
    prop: &P,
    horizon: f64,
    measure: EsdMeasure,
    time_tol: f64,
) -> Result<EsdReport> {
    if !horizon.is_finite() || horizon <= 0.0 {
        return Err(Error::InvalidGrid(format!("horizon must be > 0, got {horizon}")));
    }
    let dt = horizon / (SCAN_SAMPLES - 1) as f64;
    let times: Vec<f64> = (0..SCAN_SAMPLES)
        .map(|k| if k == SCAN_SAMPLES - 1 { horizon } else { k as f64 * dt })
        .collect();
    let samples = prop
        .states_at(&times)?
        .iter()
        .map(|rho| measure.classify(rho))
        .collect::<Result<Vec<_>>>()?;

    let death = samples
        .iter()
        .position(|&(v, _)| v > ZERO_TOL)
        .and_then(|first| (first + 1..SCAN_SAMPLES).find(|&k| samples[k].1));
    let Some(k) = death else {
        return Ok(EsdReport {
            death_time: None,
            measure,
            bracket: None,
            horizon,
            revived: false,
        });
    };

    let mut lo = times[k - 1];
    let mut hi = times[k];
    while hi - lo > time_tol {
        let mid = 0.5 * (lo + hi);
        if measure.classify(&prop.state_at(mid)?)?.1 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let revived = samples[k..].iter().any(|&(v, _)| v > ZERO_TOL);
    Ok(EsdReport {
        death_time: Some(0.5 * (lo + hi)),
        measure,
        bracket: Some((lo, hi)),
        horizon,
        revived,
    })
}

fn check_horizon(horizon: f64, gamma: f64) -> Result<()> {
    if horizon.is_nan() || horizon <= 0.0 || horizon * gamma > MAX_HORIZON_GAMMA * (1.0 + 1e-12) {
        return Err(Error::InvalidGrid(format!(
            "horizon * gamma must lie in (0, {MAX_HORIZON_GAMMA}], got {}",
            horizon * gamma
        )));
    }
    Ok(())
}

/// Death time of `measure` for identical cavities, from the closed-form
/// propagator.
pub fn esd_time(psi0: &PureState, p: &SymmetricParams, horizon: f64, measure: EsdMeasure) -> Result<EsdReport> {
    check_horizon(horizon, p.gamma)?;
    let prop = AnalyticPropagator::new(density_from_pure(psi0), *p)?;
    esd_scan(&prop, horizon, measure, BISECTION_TOL_GAMMA / p.gamma)
}

/// Like [`esd_time`] for arbitrary cavity parameters: closed forms when
/// the cavities are identical, RK4 otherwise.
pub fn esd_time_general(psi0: &PureState, p: &ReservoirParams, horizon: f64, measure: EsdMeasure) -> Result<EsdReport> {
    if let Some(sym) = p.as_symmetric() {
        return esd_time(psi0, &sym, horizon, measure);
    }
    let gamma = p.gamma_a.min(p.gamma_b);
    check_horizon(horizon, gamma)?;
    let prop = Rk4Propagator::new(density_from_pure(psi0), *p, RK4_FALLBACK_STEP_ETA / p.eta_max())?;
    esd_scan(&prop, horizon, measure, BISECTION_TOL_GAMMA / gamma)
}

/// One row of a parameter sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub death_time: Option<f64>,
    pub initial_n: f64,
    pub initial_c: f64,
}

/// One point of a sweep: the swept value and the scenario it stands for.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepCase {
    pub value: f64,
    pub psi: PureState,
    pub params: ReservoirParams,
}

/// Death times for independent scenarios, computed in parallel. Rows come
/// back in input order. Identical cavities use the closed forms, others
/// RK4.
pub fn esd_sweep(cases: &[SweepCase], horizon: f64, measure: EsdMeasure) -> Result<Vec<SweepRow>> {
    if cases.is_empty() {
        return Err(Error::InvalidParams("sweep values are empty".into()));
    }
    cases
        .par_iter()
        .map(|case| {
            let initial = measure_pair(&density_from_pure(&case.psi))?;
            let report = esd_time_general(&case.psi, &case.params, horizon, measure)?;
            Ok(SweepRow {
                value: case.value,
                death_time: report.death_time,
                initial_n: initial.log_negativity,
                initial_c: initial.concurrence,
            })
        })
        .collect()
}

/// Death time as a function of the bath photon number.
pub fn esd_vs_nbar(
    psi0: &PureState,
    gamma: f64,
    nbars: &[f64],
    horizon: f64,
    measure: EsdMeasure,
) -> Result<Vec<SweepRow>> {
    let cases = nbars
        .iter()
        .map(|&nbar| {
            Ok(SweepCase {
                value: nbar,
                psi: *psi0,
                params: ReservoirParams::symmetric(gamma, nbar)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    esd_sweep(&cases, horizon, measure)
}

/// Death time as a function of the leading amplitude (`|a₂|` for NOON,
/// `|a₁|` for Φ).
pub fn esd_vs_amplitude(
    family: EprFamily,
    p: &SymmetricParams,
    amps: &[f64],
    horizon: f64,
    measure: EsdMeasure,
) -> Result<Vec<SweepRow>> {
    if let Some(bad) = amps.iter().find(|a| !(**a > 0.0 && **a < 1.0)) {
        return Err(Error::InvalidParams(format!("amplitude {bad} outside (0, 1)")));
    }
    let cases = amps
        .iter()
        .map(|&amp| {
            Ok(SweepCase {
                value: amp,
                psi: family.state(amp)?,
                params: p.reservoir(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    esd_sweep(&cases, horizon, measure)
}

/// Sign pattern of `𝒩 − C` along a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NcOrdering {
    /// `|𝒩 − C| ≤ ZERO_TOL` everywhere.
    Equal,
    /// `𝒩 ≥ C` everywhere, strictly somewhere.
    NAbove,
    /// `𝒩 ≤ C` everywhere, strictly somewhere.
    NBelow,
    Mixed,
}

/// Per-sample comparison of the two measures on one trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureComparison {
    pub times: Vec<f64>,
    pub log_negativity: Vec<f64>,
    pub concurrence: Vec<f64>,
    pub max_abs_diff: f64,
    /// Fraction of samples with `𝒩 ≥ C − ZERO_TOL`.
    pub fraction_n_ge_c: f64,
    /// Fraction of samples with `𝒩 > C + ZERO_TOL`.
    pub fraction_n_gt_c: f64,
    pub ordering: NcOrdering,
    pub death_n: Option<f64>,
    pub death_c: Option<f64>,
    pub sample_spacing: f64,
    /// Both death estimates absent, or both present and within two sample
    /// spacings of each other.
    pub deaths_agree: bool,
}

fn sampled_death(times: &[f64], samples: &[(f64, bool)]) -> Option<f64> {
    let first = samples.iter().position(|&(v, _)| v > ZERO_TOL)?;
    (first + 1..samples.len()).find(|&k| samples[k].1).map(|k| times[k])
}

pub fn measure_comparison(traj: &Trajectory) -> Result<MeasureComparison> {
    if traj.is_empty() {
        return Err(Error::InvalidGrid("trajectory is empty".into()));
    }
    let times: Vec<f64> = traj.times().collect();
    let pairs = traj
        .samples
        .par_iter()
        .map(|s| {
            let n = EsdMeasure::LogNegativity.classify(&s.rho)?;
            let c = EsdMeasure::Concurrence.classify(&s.rho)?;
            Ok((n, c))
        })
        .collect::<Result<Vec<_>>>()?;
    let (n_class, c_class): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
    let n: Vec<f64> = n_class.iter().map(|p| p.0).collect();
    let c: Vec<f64> = c_class.iter().map(|p| p.0).collect();

    let count = times.len() as f64;
    let diffs: Vec<f64> = n.iter().zip(&c).map(|(a, b)| a - b).collect();
    let max_abs_diff = diffs.iter().fold(0.0_f64, |m, d| m.max(d.abs()));
    let ge = diffs.iter().filter(|&&d| d >= -ZERO_TOL).count();
    let gt = diffs.iter().filter(|&&d| d > ZERO_TOL).count();
    let lt = diffs.iter().filter(|&&d| d < -ZERO_TOL).count();
    let ordering = match (gt > 0, lt > 0) {
        (false, false) => NcOrdering::Equal,
        (true, false) => NcOrdering::NAbove,
        (false, true) => NcOrdering::NBelow,
        (true, true) => NcOrdering::Mixed,
    };

    let sample_spacing = times.windows(2).map(|w| w[1] - w[0]).fold(0.0_f64, f64::max);
    let death_n = sampled_death(&times, &n_class);
    let death_c = sampled_death(&times, &c_class);
    let deaths_agree = match (death_n, death_c) {
        (None, None) => true,
        (Some(a), Some(b)) => (a - b).abs() <= 2.0 * sample_spacing,
        _ => false,
    };

    Ok(MeasureComparison {
        times,
        log_negativity: n,
        concurrence: c,
        max_abs_diff,
        fraction_n_ge_c: ge as f64 / count,
        fraction_n_gt_c: gt as f64 / count,
        ordering,
        death_n,
        death_c,
        sample_spacing,
        deaths_agree,
    })
}
