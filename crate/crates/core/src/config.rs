//! Scenario configuration: flat `key = value` text with dotted section
//! prefixes. Lines starting with `#` are comments. Unknown keys, repeated keys
//! and keys that the chosen scenario does not read are errors.

use std::fmt;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::{default_params, opo_default_params, PhysicalParams};
use crate::observables::Carrier;
use crate::optics::{coherent, fock, squeezed, thermal, OpticalStateMoments, StateKind};
use crate::propagate::{Frame, Integrator};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioKind {
    SinglePulse,
    VarianceVsTime,
    FluxSqueezing,
    OmegaSweep,
    OpoTwinBeams,
    Epr,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 6] = [
        ScenarioKind::SinglePulse,
        ScenarioKind::VarianceVsTime,
        ScenarioKind::FluxSqueezing,
        ScenarioKind::OmegaSweep,
        ScenarioKind::OpoTwinBeams,
        ScenarioKind::Epr,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::SinglePulse => "single-pulse",
            ScenarioKind::VarianceVsTime => "variance-vs-time",
            ScenarioKind::FluxSqueezing => "flux-squeezing",
            ScenarioKind::OmegaSweep => "omega-sweep",
            ScenarioKind::OpoTwinBeams => "opo-twin-beams",
            ScenarioKind::Epr => "epr",
        }
    }

    /// Twin-beam scenarios run the two-mode model.
    pub fn is_twin(self) -> bool {
        matches!(self, ScenarioKind::OpoTwinBeams | ScenarioKind::Epr)
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScenarioKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        ScenarioKind::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| {
            let names: Vec<_> = ScenarioKind::ALL.iter().map(|k| k.name()).collect();
            format!("unknown scenario `{s}`, expected one of {}", names.join(", "))
        })
    }
}

/// Initial probe state of the single-mode scenarios.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpticsConfig {
    pub kind: StateKind,
    /// Coherent amplitude squared (also the thermal mean).
    pub alpha_sq: f64,
    /// Squeezing parameter.
    pub r: f64,
    /// Fock photon number.
    pub n: u64,
}

impl OpticsConfig {
    pub fn moments(&self) -> Result<OpticalStateMoments> {
        match self.kind {
            StateKind::Coherent => coherent(self.alpha_sq),
            StateKind::Fock => Ok(fock(self.n)),
            StateKind::Squeezed => squeezed(self.alpha_sq, self.r),
            StateKind::Thermal => thermal(self.alpha_sq),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub scenario: ScenarioKind,
    pub output_dir: PathBuf,
    pub params: PhysicalParams,
    /// Sign of the second coupling in the twin-beam model, `+1` or `-1`.
    pub omega2_sign: f64,
    /// Samples per momentum band.
    pub grid_n: usize,
    pub k_halfwidth: f64,
    pub dt: f64,
    pub t_final: f64,
    /// Explicit output times; empty means every `output_interval` from 0 to `t_final`.
    pub snapshot_times: Vec<f64>,
    pub output_interval: f64,
    pub interaction_picture: bool,
    pub optics: OpticsConfig,
    /// Flux observation point, m.
    pub x0: f64,
    pub epr_x1: f64,
    pub epr_x2: f64,
    pub carrier: Carrier,
    pub sweep_omegas: Vec<f64>,
}

impl ScenarioConfig {
    pub fn defaults(scenario: ScenarioKind) -> Self {
        let single = ScenarioConfig {
            scenario,
            output_dir: PathBuf::from("out"),
            params: default_params(),
            omega2_sign: 1.0,
            grid_n: 512,
            k_halfwidth: 8e4,
            dt: 1e-4,
            t_final: 0.2,
            snapshot_times: Vec::new(),
            output_interval: 0.005,
            interaction_picture: true,
            optics: OpticsConfig {
                kind: StateKind::Coherent,
                alpha_sq: 1000.0,
                r: 1.38,
                n: 1000,
            },
            x0: 1.5e-3,
            epr_x1: 1.8e-3,
            epr_x2: 0.8e-3,
            carrier: Carrier::Directional,
            sweep_omegas: vec![18.0, 45.0, 72.0, 90.0, 108.0, 126.0, 144.0, 180.0, 216.0, 270.0],
        };
        let twin = ScenarioConfig {
            params: opo_default_params(),
            grid_n: 256,
            t_final: 0.25,
            x0: 1.0e-3,
            ..single.clone()
        };
        match scenario {
            ScenarioKind::SinglePulse => single,
            ScenarioKind::VarianceVsTime => ScenarioConfig {
                output_interval: 0.002,
                ..single
            },
            ScenarioKind::FluxSqueezing => ScenarioConfig {
                params: PhysicalParams {
                    omega: 144.0,
                    ..single.params
                },
                output_interval: 0.001,
                ..single
            },
            ScenarioKind::OmegaSweep => ScenarioConfig {
                output_interval: 0.001,
                ..single
            },
            ScenarioKind::OpoTwinBeams | ScenarioKind::Epr => twin,
        }
    }

    pub fn integrator(&self) -> Integrator {
        Integrator {
            dt: self.dt,
            frame: if self.interaction_picture {
                Frame::Interaction
            } else {
                Frame::Lab
            },
        }
    }

    /// Output times in increasing order.
    pub fn output_times(&self) -> Vec<f64> {
        if !self.snapshot_times.is_empty() {
            return self.snapshot_times.clone();
        }
        let steps = (self.t_final / self.output_interval + 1e-9).floor() as usize;
        let mut times: Vec<f64> = (0..=steps).map(|i| i as f64 * self.output_interval).collect();
        if times.last().is_some_and(|&t| t < self.t_final * (1.0 - 1e-12)) {
            times.push(self.t_final);
        }
        times
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate().map_err(|e| match e {
            Error::InvalidParameter { name, reason } => Error::config(format!("params.{name}"), reason),
            other => other,
        })?;
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if self.omega2_sign != 1.0 && self.omega2_sign != -1.0 {
            return Err(Error::config("params.omega2_sign", "must be 1 or -1"));
        }
        if !(self.grid_n.is_power_of_two() && self.grid_n >= 8) {
            return Err(Error::config("grid.n", "must be a power of two, at least 8"));
        }
        if !positive(self.k_halfwidth) {
            return Err(Error::config("grid.k_halfwidth", "must be positive"));
        }
        if !positive(self.dt) {
            return Err(Error::config("integrator.dt", "must be positive"));
        }
        if !(self.t_final.is_finite() && self.t_final >= 0.0) {
            return Err(Error::config("integrator.t_final", "must be finite and >= 0"));
        }
        if !positive(self.output_interval) {
            return Err(Error::config("integrator.output_interval", "must be positive"));
        }
        let mut prev = f64::NEG_INFINITY;
        for &t in &self.snapshot_times {
            if !(t.is_finite() && t >= 0.0 && t <= self.t_final) {
                return Err(Error::config(
                    "integrator.snapshot_times",
                    format!("{t} lies outside [0, t_final = {}]", self.t_final),
                ));
            }
            if t <= prev {
                return Err(Error::config(
                    "integrator.snapshot_times",
                    "must be strictly increasing",
                ));
            }
            prev = t;
        }
        self.optics.moments().map_err(|e| match e {
            Error::InvalidParameter { name, reason } => Error::config(format!("optics.{name}"), reason),
            other => other,
        })?;
        if !positive(self.x0) {
            return Err(Error::config("observation.x0", "must be positive"));
        }
        if !(positive(self.epr_x2) && self.epr_x1.is_finite() && self.epr_x1 > self.epr_x2) {
            return Err(Error::config("epr.x1", "need x1 > x2 > 0"));
        }
        if self.scenario == ScenarioKind::OmegaSweep {
            if self.sweep_omegas.is_empty() {
                return Err(Error::config("sweep.omegas", "must list at least one value"));
            }
            if let Some(w) = self.sweep_omegas.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
                return Err(Error::config("sweep.omegas", format!("{w} is not a valid coupling")));
            }
        }
        Ok(())
    }

    /// Every key this scenario reads, in canonical order, with its resolved value.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let p = &self.params;
        let list = |v: &[f64]| v.iter().map(|&x| num(x)).collect::<Vec<_>>().join(", ");
        let mut out = vec![
            ("scenario", self.scenario.to_string()),
            ("output.dir", self.output_dir.display().to_string()),
            ("params.m", num(p.m)),
            ("params.omega_t", num(p.omega_t)),
            ("params.k_kick", num(p.k_kick)),
            ("params.omega", num(p.omega)),
            ("params.omega_a", num(p.omega_a)),
            ("params.chi_beta", num(p.chi_beta)),
            ("params.pump_detuning_matched", p.pump_detuning_matched.to_string()),
        ];
        let twin = self.scenario.is_twin();
        if twin {
            out.push(("params.omega2_sign", num(self.omega2_sign)));
        }
        out.extend([
            ("grid.n", self.grid_n.to_string()),
            ("grid.k_halfwidth", num(self.k_halfwidth)),
            ("integrator.dt", num(self.dt)),
            ("integrator.t_final", num(self.t_final)),
            ("integrator.snapshot_times", format!("[{}]", list(&self.snapshot_times))),
            ("integrator.output_interval", num(self.output_interval)),
            ("integrator.interaction_picture", self.interaction_picture.to_string()),
        ]);
        // v(J) is normalized by the state, and the variance scenario tabulates every state
        if matches!(self.scenario, ScenarioKind::SinglePulse | ScenarioKind::FluxSqueezing) {
            out.push(("optics.type", self.optics.kind.to_string()));
        }
        if !twin && self.scenario != ScenarioKind::OmegaSweep {
            out.extend([
                ("optics.alpha_sq", num(self.optics.alpha_sq)),
                ("optics.r", num(self.optics.r)),
                ("optics.n", self.optics.n.to_string()),
            ]);
        }
        if !matches!(self.scenario, ScenarioKind::SinglePulse | ScenarioKind::VarianceVsTime) {
            out.push(("observation.x0", num(self.x0)));
        }
        if self.scenario == ScenarioKind::OmegaSweep {
            out.push(("sweep.omegas", format!("[{}]", list(&self.sweep_omegas))));
        }
        if twin {
            out.extend([
                ("epr.x1", num(self.epr_x1)),
                ("epr.x2", num(self.epr_x2)),
                (
                    "epr.carrier",
                    match self.carrier {
                        Carrier::Directional => "directional",
                        Carrier::Literal => "literal",
                    }
                    .to_string(),
                ),
            ]);
        }
        out
    }

    /// Config text that parses back to `self`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (k, v) in self.entries() {
            let _ = writeln!(s, "{k} = {v}");
        }
        s
    }

    /// One-line form for output headers.
    pub fn summary(&self) -> String {
        self.entries()
            .into_iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join("; ")
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut pairs: Vec<(String, String, usize)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::config(format!("line {}", i + 1), "expected `key = value`"))?;
            let key = k.trim().to_string();
            if pairs.iter().any(|(seen, _, _)| *seen == key) {
                return Err(Error::config(key, format!("repeated on line {}", i + 1)));
            }
            pairs.push((key, v.trim().to_string(), i + 1));
        }
        let scenario: ScenarioKind = match pairs.iter().find(|(k, _, _)| k == "scenario") {
            Some((_, v, _)) => v.parse().map_err(|e| Error::config("scenario", e))?,
            None => return Err(Error::config("scenario", "missing")),
        };
        let mut cfg = ScenarioConfig::defaults(scenario);
        let allowed: Vec<&str> = cfg.entries().into_iter().map(|(k, _)| k).collect();
        for (key, value, _) in &pairs {
            if !allowed.contains(&key.as_str()) {
                let known = ScenarioKind::ALL
                    .iter()
                    .any(|s| ScenarioConfig::defaults(*s).entries().iter().any(|(k, _)| k == key));
                let reason = if known {
                    format!("not used by scenario {scenario}")
                } else {
                    "unknown key".to_string()
                };
                return Err(Error::config(key.clone(), reason));
            }
            cfg.set(key, value)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        ScenarioConfig::parse(&text)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let num = || parse_f64(key, value);
        let p = &mut self.params;
        match key {
            "scenario" => {}
            "output.dir" => {
                if value.is_empty() {
                    return Err(Error::config(key, "must not be empty"));
                }
                self.output_dir = PathBuf::from(value);
            }
            "params.m" => p.m = num()?,
            "params.omega_t" => p.omega_t = num()?,
            "params.k_kick" => p.k_kick = num()?,
            "params.omega" => p.omega = num()?,
            "params.omega_a" => p.omega_a = num()?,
            "params.chi_beta" => p.chi_beta = num()?,
            "params.pump_detuning_matched" => p.pump_detuning_matched = parse_bool(key, value)?,
            "params.omega2_sign" => self.omega2_sign = num()?,
            "grid.n" => self.grid_n = parse_int(key, value)? as usize,
            "grid.k_halfwidth" => self.k_halfwidth = num()?,
            "integrator.dt" => self.dt = num()?,
            "integrator.t_final" => self.t_final = num()?,
            "integrator.snapshot_times" => self.snapshot_times = parse_list(key, value)?,
            "integrator.output_interval" => self.output_interval = num()?,
            "integrator.interaction_picture" => self.interaction_picture = parse_bool(key, value)?,
            "optics.type" => {
                self.optics.kind = match value {
                    "coherent" => StateKind::Coherent,
                    "fock" => StateKind::Fock,
                    "squeezed" => StateKind::Squeezed,
                    "thermal" => StateKind::Thermal,
                    _ => return Err(Error::config(key, format!("unknown state `{value}`"))),
                }
            }
            "optics.alpha_sq" => self.optics.alpha_sq = num()?,
            "optics.r" => self.optics.r = num()?,
            "optics.n" => self.optics.n = parse_int(key, value)?,
            "observation.x0" => self.x0 = num()?,
            "epr.x1" => self.epr_x1 = num()?,
            "epr.x2" => self.epr_x2 = num()?,
            "epr.carrier" => {
                self.carrier = match value {
                    "directional" => Carrier::Directional,
                    "literal" => Carrier::Literal,
                    _ => return Err(Error::config(key, format!("unknown carrier `{value}`"))),
                }
            }
            "sweep.omegas" => self.sweep_omegas = parse_list(key, value)?,
            _ => return Err(Error::config(key, "unknown key")),
        }
        Ok(())
    }
}

/// Shortest round-trip text, in exponent form outside `[1e-3, 1e7)`.
fn num(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || (1e-3..1e7).contains(&a) {
        v.to_string()
    } else {
        format!("{v:e}")
    }
}

fn parse_f64(key: &str, value: &str) -> Result<f64> {
    match value.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Error::config(key, format!("`{value}` is not a finite number"))),
    }
}

fn parse_int(key: &str, value: &str) -> Result<u64> {
    value
        .parse()
        .map_err(|_| Error::config(key, format!("`{value}` is not a non-negative integer")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    value
        .parse()
        .map_err(|_| Error::config(key, format!("`{value}` is not true or false")))
}

/// `[a, b, c]`, brackets optional.
fn parse_list(key: &str, value: &str) -> Result<Vec<f64>> {
    let inner = value
        .strip_prefix('[')
        .and_then(|v| v.strip_suffix(']'))
        .unwrap_or(value)
        .trim();
    if inner.is_empty() {
        return Ok(Vec::new());
    }
    inner.split(',').map(|item| parse_f64(key, item.trim())).collect()
}
