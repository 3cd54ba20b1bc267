//! `key = value` run configuration.
//!
//! One assignment per line, `#` starts a comment, numbers may be written as
//! `num/den`. Every key is optional; see [`RunConfig::default`].

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use mfg_core::estimates::EstimateSettings;
use mfg_core::exponents::{format_rational, parse_rational, rational, to_f64, Rational};
use mfg_core::grid::GridSpec;
use mfg_core::mfg::MfgConfig;
use mfg_core::model::{HamiltonianModel, Nonlinearity};
use serde_json::{json, Value};

/// Parse failure; `line` is `None` when the offending value is a default.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => write!(f, "{}", self.message),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub d: usize,
    pub half_width: f64,
    pub n: usize,
    pub horizon: f64,
    pub cfl_factor: f64,
    pub gamma: f64,
    pub a0: f64,
    pub alpha: Rational,
    pub epsilon: f64,
    pub omega: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub coupling: bool,
    pub radius: f64,
    pub tau: f64,
    pub p_target: Option<f64>,
    pub exponent_dim: u32,
    pub m0_center: Vec<f64>,
    pub m0_radius: f64,
    pub ut_amplitude: f64,
    pub ut_width: f64,
    pub phi_center: Vec<f64>,
    pub phi_radius: f64,
    pub output_dir: PathBuf,
    /// Every `stride`-th time frame goes into the CSV series.
    pub stride: usize,
    /// Write the initial/final field snapshots.
    pub fields: bool,
    pub sample_points: usize,
    pub p_max: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            d: 1,
            half_width: 8.0,
            n: 256,
            horizon: 1.0,
            cfl_factor: 0.4,
            gamma: 2.0,
            a0: 0.0,
            alpha: rational(1, 2),
            epsilon: 0.1,
            omega: 0.5,
            tol: 1e-8,
            max_iter: 200,
            coupling: true,
            radius: 2.0,
            tau: 0.0,
            p_target: None,
            exponent_dim: 3,
            m0_center: vec![0.0],
            m0_radius: 1.0,
            ut_amplitude: 1.0,
            ut_width: 1.0,
            phi_center: vec![0.0],
            phi_radius: 1.0,
            output_dir: PathBuf::from("out"),
            stride: 1,
            fields: false,
            sample_points: 7,
            p_max: 20.0,
        }
    }
}

const KEYS: [&str; 28] = [
    "d",
    "L",
    "N",
    "T",
    "cfl_factor",
    "gamma",
    "a0",
    "alpha",
    "epsilon",
    "omega",
    "tol",
    "max_iter",
    "coupling",
    "R",
    "tau",
    "p_target",
    "exponent_dim",
    "m0_center",
    "m0_radius",
    "uT_amplitude",
    "uT_width",
    "phi_center",
    "phi_radius",
    "output_dir",
    "stride",
    "fields",
    "sample_points",
    "p_max",
];

fn number(s: &str) -> Result<f64, String> {
    if s.contains('/') {
        let r = parse_rational(s).map_err(|e| e.to_string())?;
        Ok(to_f64(&r))
    } else {
        let v: f64 = s.parse().map_err(|_| format!("not a number: {s:?}"))?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(format!("not a finite number: {s:?}"))
        }
    }
}

fn integer(s: &str) -> Result<usize, String> {
    s.parse().map_err(|_| format!("not a nonnegative integer: {s:?}"))
}

fn boolean(s: &str) -> Result<bool, String> {
    match s {
        "true" | "on" | "1" => Ok(true),
        "false" | "off" | "0" => Ok(false),
        _ => Err(format!("not a boolean: {s:?}")),
    }
}

fn vector(s: &str) -> Result<Vec<f64>, String> {
    s.split(',').map(|p| number(p.trim())).collect()
}

/// Parses the whole text; the first problem aborts with its line number.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut cfg = RunConfig::default();
    let mut lines: BTreeMap<&'static str, usize> = BTreeMap::new();
    let mut d_explicit = false;
    let mut exponent_dim_explicit = false;
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let err = |message: String| ConfigError {
            line: Some(line),
            message,
        };
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (key, value) = body
            .split_once('=')
            .ok_or_else(|| err(format!("expected `key = value`, got {body:?}")))?;
        let (key, value) = (key.trim(), value.trim());
        let key = *KEYS
            .iter()
            .find(|k| **k == key)
            .ok_or_else(|| err(format!("unknown key {key:?}")))?;
        if let Some(first) = lines.insert(key, line) {
            return Err(err(format!("{key} already set on line {first}")));
        }
        if value.is_empty() {
            return Err(err(format!("{key} has no value")));
        }
        let parsed: Result<(), String> = (|| {
            match key {
                "d" => {
                    cfg.d = integer(value)?;
                    d_explicit = true;
                }
                "L" => cfg.half_width = number(value)?,
                "N" => cfg.n = integer(value)?,
                "T" => cfg.horizon = number(value)?,
                "cfl_factor" => cfg.cfl_factor = number(value)?,
                "gamma" => cfg.gamma = number(value)?,
                "a0" => cfg.a0 = number(value)?,
                "alpha" => cfg.alpha = parse_rational(value).map_err(|e| e.to_string())?,
                "epsilon" => cfg.epsilon = number(value)?,
                "omega" => cfg.omega = number(value)?,
                "tol" => cfg.tol = number(value)?,
                "max_iter" => cfg.max_iter = integer(value)?,
                "coupling" => cfg.coupling = boolean(value)?,
                "R" => cfg.radius = number(value)?,
                "tau" => cfg.tau = number(value)?,
                "p_target" => {
                    cfg.p_target = if value == "auto" { None } else { Some(number(value)?) };
                }
                "exponent_dim" => {
                    cfg.exponent_dim = integer(value)? as u32;
                    exponent_dim_explicit = true;
                }
                "m0_center" => cfg.m0_center = vector(value)?,
                "m0_radius" => cfg.m0_radius = number(value)?,
                "uT_amplitude" => cfg.ut_amplitude = number(value)?,
                "uT_width" => cfg.ut_width = number(value)?,
                "phi_center" => cfg.phi_center = vector(value)?,
                "phi_radius" => cfg.phi_radius = number(value)?,
                "output_dir" => cfg.output_dir = PathBuf::from(value),
                "stride" => cfg.stride = integer(value)?,
                "fields" => cfg.fields = boolean(value)?,
                "sample_points" => cfg.sample_points = integer(value)?,
                "p_max" => cfg.p_max = number(value)?,
                _ => unreachable!("key list and match arms disagree"),
            }
            Ok(())
        })();
        parsed.map_err(|m| err(format!("{key}: {m}")))?;
    }
    if d_explicit && !exponent_dim_explicit {
        cfg.exponent_dim = cfg.d.max(3) as u32;
    }
    for (key, center) in [("m0_center", &mut cfg.m0_center), ("phi_center", &mut cfg.phi_center)] {
        if center.len() == 1 && cfg.d > 1 && !lines.contains_key(key) {
            *center = vec![center[0]; cfg.d];
        }
    }
    cfg.validate().map_err(|(key, message)| ConfigError {
        line: lines.get(key).copied(),
        message: format!("{key}: {message}"),
    })?;
    Ok(cfg)
}

impl RunConfig {
    fn validate(&self) -> Result<(), (&'static str, String)> {
        let grid = GridSpec::new(self.d, self.half_width, self.n, self.horizon, self.cfl_factor).map_err(|e| {
            let key = if !(1..=3).contains(&self.d) {
                "d"
            } else if self.n < 4 || self.n % 2 != 0 {
                "N"
            } else if !(self.half_width > 0.0) {
                "L"
            } else if !(self.horizon > 0.0) {
                "T"
            } else {
                "cfl_factor"
            };
            (key, e.to_string())
        })?;
        let model = HamiltonianModel::new(self.gamma, self.a0).map_err(|e| {
            let key = if self.gamma > 1.0 && self.gamma <= 2.0 { "a0" } else { "gamma" };
            (key, e.to_string())
        })?;
        let nl = Nonlinearity::new(to_f64(&self.alpha)).map_err(|e| ("alpha", e.to_string()))?;
        let mfg = MfgConfig {
            grid,
            model,
            nl,
            epsilon: self.epsilon,
            omega: self.omega,
            tol: self.tol,
            max_iter: self.max_iter,
            coupling: self.coupling,
        };
        mfg.validate().map_err(|e| {
            let key = if !(self.epsilon >= 0.0 && self.epsilon < self.half_width / 4.0) {
                "epsilon"
            } else if !(self.omega > 0.0 && self.omega <= 1.0) {
                "omega"
            } else if !(self.tol > 0.0) {
                "tol"
            } else {
                "max_iter"
            };
            (key, e.to_string())
        })?;
        if !(self.radius > 0.0) {
            return Err(("R", format!("must be positive, got {}", self.radius)));
        }
        if !(self.tau >= 0.0 && self.tau < self.horizon) {
            return Err(("tau", format!("must lie in [0, T) = [0, {}), got {}", self.horizon, self.tau)));
        }
        if let Some(p) = self.p_target {
            if !(p >= 1.0) {
                return Err(("p_target", format!("must be at least 1, got {p}")));
            }
        }
        if self.exponent_dim < 3 {
            return Err(("exponent_dim", format!("must be at least 3, got {}", self.exponent_dim)));
        }
        for (key, c) in [("m0_center", &self.m0_center), ("phi_center", &self.phi_center)] {
            if c.len() != self.d {
                return Err((key, format!("needs {} coordinates, got {}", self.d, c.len())));
            }
        }
        for (key, v) in [
            ("m0_radius", self.m0_radius),
            ("uT_width", self.ut_width),
            ("phi_radius", self.phi_radius),
            ("p_max", self.p_max),
        ] {
            if !(v > 0.0) {
                return Err((key, format!("must be positive, got {v}")));
            }
        }
        if self.stride == 0 {
            return Err(("stride", "must be at least 1".into()));
        }
        if self.sample_points == 0 {
            return Err(("sample_points", "must be at least 1".into()));
        }
        Ok(())
    }

    pub fn grid(&self) -> GridSpec {
        GridSpec::new(self.d, self.half_width, self.n, self.horizon, self.cfl_factor).expect("validated at parse time")
    }

    pub fn model(&self) -> HamiltonianModel {
        HamiltonianModel::new(self.gamma, self.a0).expect("validated at parse time")
    }

    pub fn nonlinearity(&self) -> Nonlinearity {
        Nonlinearity::new(to_f64(&self.alpha)).expect("validated at parse time")
    }

    pub fn mfg(&self) -> MfgConfig {
        MfgConfig {
            grid: self.grid(),
            model: self.model(),
            nl: self.nonlinearity(),
            epsilon: self.epsilon,
            omega: self.omega,
            tol: self.tol,
            max_iter: self.max_iter,
            coupling: self.coupling,
        }
    }

    pub fn estimate_settings(&self) -> EstimateSettings {
        EstimateSettings {
            radius: self.radius,
            tau: self.tau,
            p_target: self.p_target,
            phi_center: self.phi_center.clone(),
            phi_radius: self.phi_radius,
            alpha: self.alpha.clone(),
            exponent_dim: self.exponent_dim,
        }
    }

    /// Every effective parameter, keyed like the config file.
    pub fn echo(&self) -> Value {
        json!({
            "d": self.d,
            "L": self.half_width,
            "N": self.n,
            "T": self.horizon,
            "cfl_factor": self.cfl_factor,
            "gamma": self.gamma,
            "a0": self.a0,
            "alpha": format_rational(&self.alpha),
            "epsilon": self.epsilon,
            "omega": self.omega,
            "tol": self.tol,
            "max_iter": self.max_iter,
            "coupling": self.coupling,
            "R": self.radius,
            "tau": self.tau,
            "p_target": self.p_target.map_or(Value::from("auto"), Value::from),
            "exponent_dim": self.exponent_dim,
            "m0_center": self.m0_center,
            "m0_radius": self.m0_radius,
            "uT_amplitude": self.ut_amplitude,
            "uT_width": self.ut_width,
            "phi_center": self.phi_center,
            "phi_radius": self.phi_radius,
            "output_dir": self.output_dir.display().to_string(),
            "stride": self.stride,
            "fields": self.fields,
            "sample_points": self.sample_points,
            "p_max": self.p_max,
        })
    }

    /// Round-trips through [`parse_config`] except for `output_dir`, which is
    /// left out so that reruns elsewhere produce the same bytes.
    pub fn to_text(&self) -> String {
        let join = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ");
        let mut out = String::new();
        let mut put = |k: &str, v: String| out.push_str(&format!("{k} = {v}\n"));
        put("d", self.d.to_string());
        put("L", self.half_width.to_string());
        put("N", self.n.to_string());
        put("T", self.horizon.to_string());
        put("cfl_factor", self.cfl_factor.to_string());
        put("gamma", self.gamma.to_string());
        put("a0", self.a0.to_string());
        put("alpha", format_rational(&self.alpha));
        put("epsilon", self.epsilon.to_string());
        put("omega", self.omega.to_string());
        put("tol", self.tol.to_string());
        put("max_iter", self.max_iter.to_string());
        put("coupling", self.coupling.to_string());
        put("R", self.radius.to_string());
        put("tau", self.tau.to_string());
        put("p_target", self.p_target.map_or("auto".into(), |p| p.to_string()));
        put("exponent_dim", self.exponent_dim.to_string());
        put("m0_center", join(&self.m0_center));
        put("m0_radius", self.m0_radius.to_string());
        put("uT_amplitude", self.ut_amplitude.to_string());
        put("uT_width", self.ut_width.to_string());
        put("phi_center", join(&self.phi_center));
        put("phi_radius", self.phi_radius.to_string());
        put("stride", self.stride.to_string());
        put("fields", self.fields.to_string());
        put("sample_points", self.sample_points.to_string());
        put("p_max", self.p_max.to_string());
        out
    }
}
