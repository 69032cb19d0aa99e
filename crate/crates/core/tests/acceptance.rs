//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails.

use std::f64::consts::FRAC_1_SQRT_2;
use std::time::{Duration, Instant};

use esd_core::analysis::ZERO_TOL;
use esd_core::measures::relation_phi;
use esd_core::sampling::{random_pure_state, random_x_state, seeded_rng, XKind};
use esd_core::verify::{closed_form_deviation, compare_propagators, shipped_analytic, zero_set_agrees, VerifyOptions};
use esd_core::*;
use rayon::prelude::*;

type Criterion = (&'static str, fn() -> Result<Outcome>, Duration);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { pass, detail })
}

fn nonincreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] <= w[0] + 1e-9)
}

/// Initial measures of the NOON family from the general solvers.
fn criterion_1() -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    for k in 1..=199 {
        let amp = k as f64 / 200.0;
        let m = measure_pair(&density_from_pure(&PureState::noon(amp)?))?;
        let c = 2.0 * amp * (1.0 - amp * amp).sqrt();
        worst = worst
            .max((m.concurrence - c).abs())
            .max((m.log_negativity - (1.0 + c).log2()).abs());
    }
    let bell = measure_pair(&density_from_pure(&PureState::noon(FRAC_1_SQRT_2)?))?;
    let peak = (bell.concurrence - 1.0).abs().max((bell.log_negativity - 1.0).abs());
    outcome(
        worst <= 1e-12 && peak <= 1e-12,
        format!("199 amplitudes, max deviation {worst:.2e}, Bell peak deviation {peak:.2e}"),
    )
}

/// Vacuum NOON: no sudden death, concurrence follows `2|a₂a₃|e^{−γt}`.
fn criterion_2() -> Result<Outcome> {
    let p = SymmetricParams::vacuum(1.0)?;
    let grid = TimeGrid::new(0.0, 10.0, 1000)?;
    let (mut dev_analytic, mut dev_rk4): (f64, f64) = (0.0, 0.0);
    let mut shape_ok = true;
    for amp in [1.0 / 10f64.sqrt(), FRAC_1_SQRT_2] {
        let psi = PureState::noon(amp)?;
        let rho0 = density_from_pure(&psi);
        let c0 = 2.0 * amp * (1.0 - amp * amp).sqrt();
        let analytic = measure_comparison(&trajectory_analytic(&rho0, &p, &grid)?)?;
        let rk4 = measure_comparison(&evolve_rk4_substeps(&rho0, &p.reservoir(), &grid, 10)?)?;
        for (cmp, dev) in [(&analytic, &mut dev_analytic), (&rk4, &mut dev_rk4)] {
            for (t, c) in cmp.times.iter().zip(&cmp.concurrence) {
                *dev = dev.max((c - c0 * (-t).exp()).abs());
            }
            shape_ok &= cmp.concurrence.iter().chain(&cmp.log_negativity).all(|&v| v > 0.0);
            shape_ok &= nonincreasing(&cmp.concurrence) && nonincreasing(&cmp.log_negativity);
        }
        for m in [EsdMeasure::Concurrence, EsdMeasure::LogNegativity] {
            shape_ok &= esd_time(&psi, &p, 20.0, m)?.death_time.is_none();
        }
    }
    outcome(
        shape_ok && dev_analytic <= 1e-9 && dev_rk4 <= 1e-6,
        format!("positive and nonincreasing: {shape_ok}, C deviation analytic {dev_analytic:.2e}, rk4 {dev_rk4:.2e}"),
    )
}

fn bell_death_times(family: EprFamily, nbar: f64) -> Result<(Option<f64>, Option<f64>)> {
    let psi = family.state(FRAC_1_SQRT_2)?;
    let p = SymmetricParams::new(1.0, nbar)?;
    let c = esd_time(&psi, &p, 20.0, EsdMeasure::Concurrence)?;
    let n = esd_time(&psi, &p, 20.0, EsdMeasure::LogNegativity)?;
    Ok((c.death_time, n.death_time))
}

/// Thermal Bell NOON: sudden death, earlier at higher temperature, same
/// time for both measures.
fn criterion_3() -> Result<Outcome> {
    let (c1, n1) = bell_death_times(EprFamily::Noon, 0.1)?;
    let (c2, n2) = bell_death_times(EprFamily::Noon, 0.25)?;
    let (Some(c1), Some(n1), Some(c2), Some(n2)) = (c1, n1, c2, n2) else {
        return outcome(false, "missing death time".into());
    };
    let gap = (c1 - n1).abs().max((c2 - n2).abs());
    outcome(
        c2 < c1 && gap <= 1e-5,
        format!("t*(0.1) = {c1:.9}, t*(0.25) = {c2:.9}, measure gap {gap:.2e}"),
    )
}

/// Vacuum Φ family: sudden death exactly when `|a₁| < |a₄|`, at
/// `−ln(1 − |a₁|/|a₄|)/γ`.
fn criterion_4() -> Result<Outcome> {
    let p = SymmetricParams::vacuum(1.0)?;
    let mut pattern_ok = true;
    let mut err_half = f64::INFINITY;
    for a1 in [0.3, 0.5, 0.6, FRAC_1_SQRT_2, 0.8, 0.9] {
        let a4 = (1.0 - a1 * a1).sqrt();
        let psi = PureState::phi(a1)?;
        for m in [EsdMeasure::Concurrence, EsdMeasure::LogNegativity] {
            let r = esd_time(&psi, &p, 20.0, m)?;
            pattern_ok &= r.death_time.is_some() == (a1 < a4 - 1e-12) && !r.revived;
            if a1 == 0.5 {
                let expected = -(1.0 - a1 / a4).ln() / p.gamma;
                let e = r.death_time.map_or(f64::INFINITY, |t| (t - expected).abs());
                err_half = if err_half.is_finite() { err_half.max(e) } else { e };
            }
        }
    }
    outcome(
        pattern_ok && err_half <= 1e-4,
        format!("finite iff a1 < a4: {pattern_ok}, |a1| = 0.5 error {err_half:.2e}"),
    )
}

/// Thermal Bell Φ: sudden death earlier at higher temperature, `𝒩 ≥ C`
/// sample by sample, pattern relation exact.
fn criterion_5() -> Result<Outcome> {
    let (c1, _) = bell_death_times(EprFamily::Phi, 0.1)?;
    let (c2, _) = bell_death_times(EprFamily::Phi, 0.25)?;
    let (Some(t1), Some(t2)) = (c1, c2) else {
        return outcome(false, "missing death time".into());
    };
    let rho0 = density_from_pure(&PureState::phi(FRAC_1_SQRT_2)?);
    let grid = TimeGrid::new(0.0, 5.0, 1000)?;
    let mut fraction: f64 = 1.0;
    let mut relation_dev: f64 = 0.0;
    let mut pattern_samples = 0;
    for nbar in [0.1, 0.25] {
        let p = SymmetricParams::new(1.0, nbar)?;
        let traj = trajectory_analytic(&rho0, &p, &grid)?;
        fraction = fraction.min(measure_comparison(&traj)?.fraction_n_ge_c);
        for s in &traj.samples {
            if let Ok((n, _)) = relation_phi(&s.rho) {
                pattern_samples += 1;
                relation_dev = relation_dev.max((n - log_negativity(&s.rho)?).abs());
            }
        }
    }
    outcome(
        t2 < t1 && fraction == 1.0 && pattern_samples == 2 * grid.times().count() && relation_dev <= 1e-9,
        format!(
            "t*(0.1) = {t1:.9}, t*(0.25) = {t2:.9}, N >= C fraction {fraction}, relation deviation {relation_dev:.2e} over {pattern_samples} samples"
        ),
    )
}

/// Closed-form propagator against RK4 on random pure states.
fn criterion_6() -> Result<Outcome> {
    let opts = VerifyOptions::new(20240601, 100);
    let mut rng = seeded_rng(opts.seed);
    let states: Vec<_> = (0..opts.trials)
        .map(|_| density_from_pure(&random_pure_state(&mut rng)))
        .collect();
    let jobs: Vec<_> = states
        .iter()
        .flat_map(|r| opts.nbars.iter().map(move |&n| (r, n)))
        .collect();
    let devs = jobs
        .par_iter()
        .map(|&(rho0, nbar)| {
            compare_propagators(rho0, &SymmetricParams::new(opts.gamma, nbar)?, &opts, &shipped_analytic)
        })
        .collect::<Result<Vec<_>>>()?;
    let max_dev = devs.iter().map(|d| d.0).fold(0.0, f64::max);
    let max_t0 = devs.iter().map(|d| d.1).fold(0.0, f64::max);
    outcome(
        max_dev <= 1e-6 && max_t0 <= 1e-12,
        format!(
            "{} runs, max deviation {max_dev:.2e}, t = 0 deviation {max_t0:.2e}",
            jobs.len()
        ),
    )
}

/// X-state closed forms against the general measures.
fn criterion_7() -> Result<Outcome> {
    let mut rng = seeded_rng(7);
    let states = (0..1000)
        .map(|i| {
            random_x_state(
                &mut rng,
                if i % 2 == 0 {
                    XKind::Coherence23
                } else {
                    XKind::Coherence14
                },
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let max_dev = states
        .par_iter()
        .map(closed_form_deviation)
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let agree = states
        .par_iter()
        .map(zero_set_agrees)
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .filter(|&ok| ok)
        .count();
    let entangled = states
        .iter()
        .filter(|s| concurrence(s).is_ok_and(|c| c > ZERO_TOL))
        .count();
    outcome(
        max_dev <= 1e-9 && agree == states.len(),
        format!(
            "1000 states ({entangled} entangled), max deviation {max_dev:.2e}, zero-set agreement {agree}/{}",
            states.len()
        ),
    )
}

/// Long-time limit equals the stationary state.
fn criterion_8() -> Result<Outcome> {
    let starts = [
        density_from_pure(&PureState::noon(FRAC_1_SQRT_2)?),
        density_from_pure(&PureState::from_real([0.1, 0.3, -0.5, 0.65f64.sqrt()])?),
    ];
    let (mut dev, mut rhs): (f64, f64) = (0.0, 0.0);
    for nbar in [0.0, 0.25, 0.5, 2.0] {
        let p = SymmetricParams::new(1.0, nbar)?;
        let ss = steady_state(&p);
        rhs = rhs.max(lindblad_rhs(&ss, &p.reservoir()).max_abs());
        let t_end = 50.0 / p.gamma;
        let grid = TimeGrid::new(0.0, t_end, 1)?;
        let substeps = (t_end * p.eta() / 1e-2).ceil() as usize;
        for rho0 in &starts {
            let analytic = evolve_analytic(rho0, &p, t_end);
            let rk4 = evolve_rk4_substeps(rho0, &p.reservoir(), &grid, substeps)?;
            let rk4_end = rk4.last().expect("two samples").rho;
            dev = dev
                .max(analytic.matrix().max_abs_diff(ss.matrix()))
                .max(rk4_end.matrix().max_abs_diff(ss.matrix()));
        }
    }
    outcome(
        dev <= 1e-6 && rhs <= 1e-12,
        format!("max deviation at gamma t = 50 {dev:.2e}, stationary residual {rhs:.2e}"),
    )
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("initial measure curve", criterion_1, Duration::from_secs(1)),
        ("vacuum NOON without sudden death", criterion_2, Duration::from_secs(5)),
        ("thermal NOON death ordering", criterion_3, Duration::from_secs(5)),
        ("vacuum phi death criterion", criterion_4, Duration::from_secs(2)),
        ("thermal phi death and N >= C", criterion_5, Duration::from_secs(5)),
        ("closed forms against rk4", criterion_6, Duration::from_secs(30)),
        ("X-state measure cross-check", criterion_7, Duration::from_secs(10)),
        ("steady state", criterion_8, Duration::from_secs(5)),
    ];
    let mut failed = 0;
    for (i, (name, run, budget)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let result = run();
        let elapsed = start.elapsed();
        let (pass, detail) = match result {
            Ok(o) => (o.pass && elapsed <= budget, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {}: {} | {name} | {detail} | {:.3}s (limit {}s)",
            i + 1,
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
