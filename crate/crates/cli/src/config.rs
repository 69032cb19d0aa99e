//! Scenario settings from a `key=value` file overlaid with command-line
//! flags, and their resolution into validated core types.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use esd_core::{EsdMeasure, PureState, ReservoirParams};
use num_complex::Complex64;

use crate::CliError;

/// Keys accepted in a config file. Flags use the same names with `-`.
pub const KEYS: &[&str] = &[
    "family", "a1", "a2", "a3", "a4", "amp", "gamma", "nbar", "nbar_a", "nbar_b", "gamma_a", "gamma_b", "t_end",
    "steps", "method", "measure", "horizon", "seed", "trials", "axis", "values", "out",
];

fn canonical(key: &str) -> String {
    key.trim().replace('-', "_")
}

/// Flat string settings; later layers override earlier ones.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    /// Parses `key = value` lines. Blank lines and `#` comments are skipped.
    pub fn parse_file_contents(text: &str) -> Result<Self, CliError> {
        let mut s = Settings::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::usage(format!("config line {}: expected key=value", n + 1)))?;
            s.set(k, v.trim())
                .map_err(|e| CliError::usage(format!("config line {}: {}", n + 1, e.message)))?;
        }
        Ok(s)
    }

    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse_file_contents(&text)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let key = canonical(key);
        if !KEYS.contains(&key.as_str()) {
            return Err(CliError::usage(format!("unknown setting '{key}'")));
        }
        self.values.insert(key, value.to_string());
        Ok(())
    }

    pub fn overlay(&mut self, other: &Settings) {
        for (k, v) in &other.values {
            self.values.insert(k.clone(), v.clone());
        }
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn has(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: Display,
    {
        self.raw(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|e| CliError::usage(format!("invalid value '{v}' for {key}: {e}")))
            })
            .transpose()
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T, CliError>
    where
        T::Err: Display,
    {
        Ok(self.get(key)?.unwrap_or(default))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Noon,
    Phi,
    Custom,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Noon => "noon",
            Family::Phi => "phi",
            Family::Custom => "custom",
        }
    }
}

impl FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "noon" => Ok(Family::Noon),
            "phi" => Ok(Family::Phi),
            "custom" => Ok(Family::Custom),
            _ => Err("expected noon, phi or custom".into()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodChoice {
    Analytic,
    Rk4,
    Both,
}

impl FromStr for MethodChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "analytic" => Ok(MethodChoice::Analytic),
            "rk4" => Ok(MethodChoice::Rk4),
            "both" => Ok(MethodChoice::Both),
            _ => Err("expected analytic, rk4 or both".into()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasureChoice {
    Both,
    Concurrence,
    LogNegativity,
}

impl MeasureChoice {
    pub fn measures(self) -> Vec<EsdMeasure> {
        match self {
            MeasureChoice::Both => vec![EsdMeasure::Concurrence, EsdMeasure::LogNegativity],
            MeasureChoice::Concurrence => vec![EsdMeasure::Concurrence],
            MeasureChoice::LogNegativity => vec![EsdMeasure::LogNegativity],
        }
    }
}

impl FromStr for MeasureChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "both" => Ok(MeasureChoice::Both),
            "concurrence" => Ok(MeasureChoice::Concurrence),
            "log_negativity" | "log-negativity" => Ok(MeasureChoice::LogNegativity),
            _ => Err("expected both, concurrence or log_negativity".into()),
        }
    }
}

fn parse_complex(s: &str) -> Result<Complex64, String> {
    s.parse::<Complex64>()
        .map_err(|_| format!("'{s}' is not a complex number (e.g. 0.5 or 0.3+0.4i)"))
}

/// Fully validated scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub family: Family,
    pub psi: PureState,
    pub params: ReservoirParams,
    /// Rate used for the dimensionless time column and default horizons.
    pub gamma: f64,
    pub t_end: f64,
    pub steps: usize,
    pub method: MethodChoice,
    pub measure: MeasureChoice,
    pub horizon: f64,
}

fn named_amplitude(s: &Settings, family: Family) -> Result<f64, CliError> {
    let (own, others): (&str, [&str; 3]) = match family {
        Family::Noon => ("a2", ["a1", "a3", "a4"]),
        _ => ("a1", ["a2", "a3", "a4"]),
    };
    if let Some(k) = others.iter().find(|k| s.has(k)) {
        return Err(CliError::usage(format!(
            "--{k} is not used by the {} family; give --amp or --{own}",
            family.name()
        )));
    }
    let amp = match (s.get::<f64>("amp")?, s.get::<f64>(own)?) {
        (Some(_), Some(_)) => return Err(CliError::usage(format!("give only one of --amp and --{own}"))),
        (Some(a), None) | (None, Some(a)) => a.abs(),
        (None, None) => FRAC_1_SQRT_2,
    };
    if amp.is_nan() || amp > 1.0 {
        return Err(CliError::usage(format!("amplitude {amp} must lie in [0, 1]")));
    }
    Ok(amp)
}

pub fn resolve_state(s: &Settings) -> Result<(Family, PureState), CliError> {
    let any_custom = ["a1", "a2", "a3", "a4"].iter().any(|k| s.has(k));
    let family = match s.get::<Family>("family")? {
        Some(f) => f,
        None if any_custom && !s.has("amp") => Family::Custom,
        None => Family::Noon,
    };
    let psi = match family {
        Family::Noon => PureState::noon(named_amplitude(s, family)?)?,
        Family::Phi => PureState::phi(named_amplitude(s, family)?)?,
        Family::Custom => {
            if s.has("amp") {
                return Err(CliError::usage("--amp needs --family noon or phi"));
            }
            let mut a = [Complex64::new(0.0, 0.0); 4];
            for (i, key) in ["a1", "a2", "a3", "a4"].iter().enumerate() {
                if let Some(v) = s.raw(key) {
                    a[i] = parse_complex(v).map_err(|e| CliError::usage(format!("{key}: {e}")))?;
                }
            }
            PureState::normalized(a[0], a[1], a[2], a[3])?
        }
    };
    Ok((family, psi))
}

/// Rates and photon numbers; the per-cavity keys default to the shared ones.
pub fn resolve_params(s: &Settings) -> Result<(ReservoirParams, f64), CliError> {
    let gamma = s.get_or("gamma", 1.0)?;
    let nbar = s.get_or("nbar", 0.0)?;
    let p = ReservoirParams::new(
        s.get_or("gamma_a", gamma)?,
        s.get_or("gamma_b", gamma)?,
        s.get_or("nbar_a", nbar)?,
        s.get_or("nbar_b", nbar)?,
    )?;
    Ok((p, gamma))
}

pub fn resolve(s: &Settings) -> Result<Scenario, CliError> {
    let (family, psi) = resolve_state(s)?;
    let (params, gamma) = resolve_params(s)?;
    let symmetric = params.as_symmetric().is_some();
    let method = match s.get::<MethodChoice>("method")? {
        Some(MethodChoice::Rk4) => MethodChoice::Rk4,
        Some(m) if !symmetric => {
            let tag = if m == MethodChoice::Both { "both" } else { "analytic" };
            return Err(CliError::usage(format!(
                "method {tag} needs identical cavities; use --method rk4 with per-cavity parameters"
            )));
        }
        Some(m) => m,
        None if symmetric => MethodChoice::Analytic,
        None => MethodChoice::Rk4,
    };
    let steps: i64 = s.get_or("steps", 1000)?;
    if steps < 1 {
        return Err(CliError::usage("steps must be ≥ 1"));
    }
    let t_end = s.get_or("t_end", 10.0 / gamma)?;
    let horizon = s.get_or("horizon", esd_core::analysis::DEFAULT_HORIZON_GAMMA / gamma)?;
    Ok(Scenario {
        family,
        psi,
        params,
        gamma,
        t_end,
        steps: steps as usize,
        method,
        measure: s.get_or("measure", MeasureChoice::Both)?,
        horizon,
    })
}
