use std::fs::File;
use std::io::{BufWriter, Write};

use csv::{Terminator, WriterBuilder};
use esd_core::analysis::{esd_sweep, esd_time_general, measure_comparison, SweepCase, SweepRow};
use esd_core::dynamics::{evolve_rk4_substeps, trajectory_analytic, TimeGrid, Trajectory};
use esd_core::verify::{
    run_verification, shipped_analytic, AnalyticFn, VerifyOptions, ANALYTIC_VS_RK4_TOL, CLOSED_FORM_TOL,
    T0_IDENTITY_TOL,
};
use esd_core::{density_from_pure, steady_state, EprFamily, EsdMeasure, ReservoirParams, SymmetricParams};

use crate::config::{resolve, resolve_params, resolve_state, Family, MethodChoice, Scenario, Settings};
use crate::{CliError, Command, EXIT_OK, EXIT_VERIFY_FAILED};

/// `h · η` used for RK4 trajectories.
pub const RK4_STEP_ETA: f64 = 1e-3;

pub const TRAJECTORY_COLUMNS: [&str; 8] = ["N", "C", "rho11", "rho22", "rho33", "rho44", "abs_rho23", "abs_rho14"];

pub fn dispatch(command: &Command, out: &mut dyn Write) -> Result<i32, CliError> {
    match command {
        Command::Evolve(args) => with_output(&args.settings()?, out, cmd_evolve),
        Command::Esd(args) => with_output(&args.settings()?, out, cmd_esd),
        Command::Sweep(args) => with_output(&args.settings()?, out, cmd_sweep),
        Command::Verify(args) => with_output(&args.settings()?, out, |s, w| cmd_verify(s, w, &shipped_analytic)),
        Command::Steady(args) => with_output(&args.settings()?, out, cmd_steady),
    }
}

fn with_output(
    s: &Settings,
    out: &mut dyn Write,
    f: impl FnOnce(&Settings, &mut dyn Write) -> Result<i32, CliError>,
) -> Result<i32, CliError> {
    match s.raw("out") {
        None | Some("-") | Some("stdout") => {
            let code = f(s, out)?;
            out.flush()?;
            Ok(code)
        }
        Some(path) => {
            let file = File::create(path).map_err(|e| CliError::usage(format!("cannot create {path}: {e}")))?;
            let mut w = BufWriter::new(file);
            let code = f(s, &mut w)?;
            w.flush()?;
            Ok(code)
        }
    }
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_writer(out: &mut dyn Write) -> csv::Writer<&mut dyn Write> {
    WriterBuilder::new().terminator(Terminator::Any(b'\n')).from_writer(out)
}

fn trajectory_columns(traj: &Trajectory) -> Result<Vec<[f64; 8]>, CliError> {
    let cmp = measure_comparison(traj)?;
    Ok(traj
        .samples
        .iter()
        .enumerate()
        .map(|(k, s)| {
            let p = s.rho.populations();
            [
                cmp.log_negativity[k],
                cmp.concurrence[k],
                p[0],
                p[1],
                p[2],
                p[3],
                s.rho.get(1, 2).norm(),
                s.rho.get(0, 3).norm(),
            ]
        })
        .collect())
}

fn rk4_trajectory(sc: &Scenario, grid: &TimeGrid) -> Result<Trajectory, CliError> {
    let substeps = (grid.step() * sc.params.eta_max() / RK4_STEP_ETA).ceil().max(1.0) as usize;
    Ok(evolve_rk4_substeps(
        &density_from_pure(&sc.psi),
        &sc.params,
        grid,
        substeps,
    )?)
}

fn analytic_trajectory(sc: &Scenario, grid: &TimeGrid) -> Result<Trajectory, CliError> {
    let p = sc
        .params
        .as_symmetric()
        .ok_or_else(|| CliError::usage("the analytic method needs identical cavities"))?;
    Ok(trajectory_analytic(&density_from_pure(&sc.psi), &p, grid)?)
}

/// CSV trajectory: `t, gamma_t` and the trajectory columns, plus `_rk4`
/// copies when both propagators run.
pub fn cmd_evolve(s: &Settings, out: &mut dyn Write) -> Result<i32, CliError> {
    let sc = resolve(s)?;
    let grid = TimeGrid::new(0.0, sc.t_end, sc.steps)?;
    let primary = match sc.method {
        MethodChoice::Rk4 => rk4_trajectory(&sc, &grid)?,
        _ => analytic_trajectory(&sc, &grid)?,
    };
    let rows = trajectory_columns(&primary)?;
    let paired = match sc.method {
        MethodChoice::Both => Some(trajectory_columns(&rk4_trajectory(&sc, &grid)?)?),
        _ => None,
    };

    let mut w = csv_writer(out);
    let mut header = vec!["t".to_string(), "gamma_t".to_string()];
    header.extend(TRAJECTORY_COLUMNS.iter().map(|c| c.to_string()));
    if paired.is_some() {
        header.extend(TRAJECTORY_COLUMNS.iter().map(|c| format!("{c}_rk4")));
    }
    w.write_record(&header)?;
    for (k, t) in primary.times().enumerate() {
        let mut record = vec![num(t), num(sc.gamma * t)];
        record.extend(rows[k].iter().map(|&x| num(x)));
        if let Some(p) = &paired {
            record.extend(p[k].iter().map(|&x| num(x)));
        }
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(EXIT_OK)
}

fn describe_params(p: &ReservoirParams) -> String {
    format!(
        "gamma_a={} gamma_b={} nbar_a={} nbar_b={}",
        p.gamma_a, p.gamma_b, p.nbar_a, p.nbar_b
    )
}

/// One line per requested measure with the death time or `none`.
pub fn cmd_esd(s: &Settings, out: &mut dyn Write) -> Result<i32, CliError> {
    let sc = resolve(s)?;
    let a = sc.psi.amplitudes();
    for m in sc.measure.measures() {
        let r = esd_time_general(&sc.psi, &sc.params, sc.horizon, m)?;
        let (death, scaled, width) = match (r.death_time, r.bracket_width()) {
            (Some(t), Some(w)) => (t.to_string(), (sc.gamma * t).to_string(), format!("{w:e}")),
            _ => ("none".to_string(), "none".to_string(), "none".to_string()),
        };
        writeln!(
            out,
            "family={} a1={} a2={} a3={} a4={} {} horizon={} measure={} death_time={death} gamma_t_death={scaled} bracket_width={width} revived={}",
            sc.family.name(),
            a[0],
            a[1],
            a[2],
            a[3],
            describe_params(&sc.params),
            sc.horizon,
            m.name(),
            r.revived
        )?;
    }
    Ok(EXIT_OK)
}

/// Comma list (`0.1,0.25`) or inclusive range (`start:stop:step`).
pub fn parse_values(spec: &str) -> Result<Vec<f64>, CliError> {
    let bad = |v: &str| CliError::usage(format!("invalid sweep value '{v}'"));
    let spec = spec.trim();
    if spec.is_empty() {
        return Err(CliError::usage("sweep values are empty"));
    }
    let parts: Vec<&str> = spec.split(':').collect();
    match parts.as_slice() {
        [start, stop, step] => {
            let [start, stop, step] = [start, stop, step].map(|v| v.trim().parse::<f64>().map_err(|_| bad(v)));
            let (start, stop, step) = (start?, stop?, step?);
            if step.is_nan() || step <= 0.0 || stop.is_nan() || stop < start {
                return Err(CliError::usage("range needs start <= stop and step > 0"));
            }
            let n = ((stop - start) / step + 1e-9).floor() as usize;
            Ok((0..=n).map(|k| start + k as f64 * step).collect())
        }
        [_] => spec
            .split(',')
            .map(|v| v.trim().parse::<f64>().map_err(|_| bad(v)))
            .collect(),
        _ => Err(bad(spec)),
    }
}

/// CSV table: swept value, initial measures and the death time per measure
/// (blank when there is none).
pub fn cmd_sweep(s: &Settings, out: &mut dyn Write) -> Result<i32, CliError> {
    let axis = s
        .raw("axis")
        .ok_or_else(|| CliError::usage("sweep needs --axis nbar|amplitude"))?;
    let values = parse_values(s.raw("values").ok_or_else(|| CliError::usage("sweep needs --values"))?)?;
    let sc = resolve(s)?;
    let cases = match axis {
        "nbar" => {
            let (base, _) = resolve_params(s)?;
            values
                .iter()
                .map(|&v| {
                    Ok(SweepCase {
                        value: v,
                        psi: sc.psi,
                        params: ReservoirParams::new(base.gamma_a, base.gamma_b, v, v)?,
                    })
                })
                .collect::<Result<Vec<_>, CliError>>()?
        }
        "amplitude" => {
            let family = match resolve_state(s)?.0 {
                Family::Noon => EprFamily::Noon,
                Family::Phi => EprFamily::Phi,
                Family::Custom => return Err(CliError::usage("the amplitude axis needs --family noon or phi")),
            };
            values
                .iter()
                .map(|&v| {
                    Ok(SweepCase {
                        value: v,
                        psi: family.state(v)?,
                        params: sc.params,
                    })
                })
                .collect::<Result<Vec<_>, CliError>>()?
        }
        other => {
            return Err(CliError::usage(format!(
                "unknown sweep axis '{other}', expected nbar or amplitude"
            )))
        }
    };

    let measures = sc.measure.measures();
    let tables = measures
        .iter()
        .map(|&m| esd_sweep(&cases, sc.horizon, m))
        .collect::<Result<Vec<Vec<SweepRow>>, _>>()?;

    let mut w = csv_writer(out);
    let mut header = vec![axis.to_string(), "initial_N".into(), "initial_C".into()];
    if measures.len() == 1 {
        header.push("death_time".into());
    } else {
        header.extend(measures.iter().map(|m| match m {
            EsdMeasure::Concurrence => "death_time_C".to_string(),
            EsdMeasure::LogNegativity => "death_time_N".to_string(),
        }));
    }
    w.write_record(&header)?;
    for (k, row) in tables[0].iter().enumerate() {
        let mut record = vec![num(row.value), num(row.initial_n), num(row.initial_c)];
        record.extend(tables.iter().map(|t| t[k].death_time.map(num).unwrap_or_default()));
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(EXIT_OK)
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

/// Runs the oracle suites with `analytic` as the closed-form propagator.
/// Exit code 1 if any tolerance is breached.
pub fn cmd_verify(s: &Settings, out: &mut dyn Write, analytic: &AnalyticFn) -> Result<i32, CliError> {
    let seed: u64 = s.get_or("seed", 42)?;
    let trials: i64 = s.get_or("trials", 100)?;
    if trials < 1 {
        return Err(CliError::usage("trials must be ≥ 1"));
    }
    let opts = VerifyOptions::new(seed, trials as usize);
    let r = run_verification(&opts, analytic)?;
    writeln!(
        out,
        "analytic vs rk4: max deviation {:e} (tolerance {ANALYTIC_VS_RK4_TOL:e}), t = 0 deviation {:e} (tolerance {T0_IDENTITY_TOL:e}) {}",
        r.max_analytic_vs_rk4,
        r.max_t0_deviation,
        verdict(r.propagators_agree())
    )?;
    writeln!(
        out,
        "X-state closed forms vs general: max deviation {:e} (tolerance {CLOSED_FORM_TOL:e}) {}",
        r.max_closed_vs_general,
        verdict(r.closed_forms_agree())
    )?;
    writeln!(
        out,
        "zero-set agreement: {}/{} {}",
        r.zero_set_agree,
        r.zero_set_total,
        verdict(r.zero_sets_agree())
    )?;
    writeln!(out, "verification {}", verdict(r.passed()))?;
    Ok(if r.passed() { EXIT_OK } else { EXIT_VERIFY_FAILED })
}

pub fn cmd_steady(s: &Settings, out: &mut dyn Write) -> Result<i32, CliError> {
    let p = SymmetricParams::new(s.get_or("gamma", 1.0)?, s.get_or("nbar", 0.0)?)?;
    let pop = steady_state(&p).populations();
    writeln!(
        out,
        "nbar={} gamma={} rho11={} rho22={} rho33={} rho44={}",
        p.nbar, p.gamma, pop[0], pop[1], pop[2], pop[3]
    )?;
    Ok(EXIT_OK)
}
