//! Experiment configuration files.
//!
//! Grammar, one entry per line:
//!
//! ```text
//! line    = ws [ key ws "=" ws value ws ] [ "#" comment ]
//! key     = [A-Za-z0-9_.]+
//! value   = number | string | bool | array
//! string  = '"' { any char except '"' and control characters } '"'
//! bool    = "true" | "false"
//! array   = "[" [ number { "," number } ] "]"
//! ```
//!
//! Every key is optional and defaults to the value in [`RunConfig::default`].
//! Unknown and repeated keys are rejected.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::kernel::{KernelFamily, KernelSpec};
use crate::nonlinearity::NonlinearitySpec;
use crate::oracle::MarchOptions;
use crate::rg::PicardOptions;
use crate::spectral::SpectralGrid;
use crate::timescale::{RModel, TimeScale};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct ConfigError {
    pub line: usize,
    pub message: String,
}

impl ConfigError {
    fn new(line: usize, message: impl Into<String>) -> Self {
        ConfigError {
            line,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyName {
    Gaussian,
    Stable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RModelName {
    Zero,
    Power,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelConfig {
    pub family: FamilyName,
    /// Scaling exponent; the stability index for stable kernels.
    pub d: f64,
    pub q: u32,
    pub m: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimescaleConfig {
    pub p: f64,
    pub r_model: RModelName,
    pub b: f64,
    pub gamma: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NonlinearityConfig {
    pub lambda: f64,
    pub alpha: u32,
    pub coeffs: Vec<f64>,
    pub rho: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridConfig {
    pub omega_max: f64,
    pub n_points: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RgConfig {
    pub big_l: f64,
    pub n_steps: u32,
    pub picard_tol: f64,
    pub picard_max_iter: usize,
    pub substeps: usize,
    pub small_data_override: bool,
    pub delta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleConfig {
    pub big_t: f64,
    pub steps_per_octave: u32,
}

/// Initial data `amplitude * f_p* + perturbation * g`, with `g` the first
/// member of the seeded mean-zero family.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialConfig {
    pub amplitude: f64,
    pub perturbation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub kernel: KernelConfig,
    pub timescale: TimescaleConfig,
    pub nonlinearity: NonlinearityConfig,
    pub grid: GridConfig,
    pub rg: RgConfig,
    pub oracle: OracleConfig,
    pub initial: InitialConfig,
    pub seed: u64,
    pub contraction_samples: usize,
    pub output_dir: String,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            kernel: KernelConfig {
                family: FamilyName::Gaussian,
                d: 2.0,
                q: 2,
                m: 1,
            },
            timescale: TimescaleConfig {
                p: 1.0,
                r_model: RModelName::Zero,
                b: 0.0,
                gamma: 1.0,
            },
            nonlinearity: NonlinearityConfig {
                lambda: 1.0,
                alpha: 3,
                coeffs: vec![1.0],
                rho: 10.0,
            },
            grid: GridConfig {
                omega_max: 16.0,
                n_points: 2048,
            },
            rg: RgConfig {
                big_l: 2.0,
                n_steps: 10,
                picard_tol: 1e-10,
                picard_max_iter: 50,
                substeps: 64,
                small_data_override: true,
                delta: None,
            },
            oracle: OracleConfig {
                big_t: 64.0,
                steps_per_octave: 16,
            },
            initial: InitialConfig {
                amplitude: 0.01,
                perturbation: 0.0,
            },
            seed: 0,
            contraction_samples: 20,
            output_dir: "out".to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Value {
    Num(String),
    Str(String),
    Bool(bool),
    Array(Vec<String>),
}

impl Value {
    fn kind(&self) -> &'static str {
        match self {
            Value::Num(_) => "a number",
            Value::Str(_) => "a string",
            Value::Bool(_) => "a boolean",
            Value::Array(_) => "an array",
        }
    }
}

fn parse_value(text: &str, line: usize) -> Result<(Value, &str), ConfigError> {
    let err = |m: String| ConfigError::new(line, m);
    if let Some(rest) = text.strip_prefix('"') {
        let end = rest
            .find('"')
            .ok_or_else(|| err("unterminated string".into()))?;
        let s = &rest[..end];
        if s.chars().any(char::is_control) {
            return Err(err("control character in string".into()));
        }
        return Ok((Value::Str(s.to_string()), &rest[end + 1..]));
    }
    if let Some(rest) = text.strip_prefix('[') {
        let end = rest.find(']').ok_or_else(|| err("unterminated array".into()))?;
        let body = rest[..end].trim();
        let items = if body.is_empty() {
            Vec::new()
        } else {
            body.split(',').map(|s| s.trim().to_string()).collect()
        };
        for item in &items {
            if item.is_empty() || item.contains(char::is_whitespace) {
                return Err(err(format!("malformed array element '{item}'")));
            }
        }
        return Ok((Value::Array(items), &rest[end + 1..]));
    }
    let end = text
        .find(|c: char| c.is_whitespace() || c == '#')
        .unwrap_or(text.len());
    let token = &text[..end];
    let value = match token {
        "" => return Err(err("missing value".into())),
        "true" => Value::Bool(true),
        "false" => Value::Bool(false),
        _ => Value::Num(token.to_string()),
    };
    Ok((value, &text[end..]))
}

/// Splits the text into `(line number, key, value)` entries.
fn tokenize(text: &str) -> Result<Vec<(usize, String, Value)>, ConfigError> {
    let mut entries = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let s = raw.trim_start();
        if s.is_empty() || s.starts_with('#') {
            continue;
        }
        let eq = s
            .find('=')
            .ok_or_else(|| ConfigError::new(line, "expected 'key = value'"))?;
        let key = s[..eq].trim_end();
        if key.is_empty()
            || !key
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.')
        {
            return Err(ConfigError::new(line, format!("invalid key '{key}'")));
        }
        let (value, rest) = parse_value(s[eq + 1..].trim_start(), line)?;
        let rest = rest.trim_start();
        if !(rest.is_empty() || rest.starts_with('#')) {
            return Err(ConfigError::new(
                line,
                format!("unexpected trailing text '{rest}'"),
            ));
        }
        entries.push((line, key.to_string(), value));
    }
    Ok(entries)
}

fn float(v: &Value, line: usize) -> Result<f64, ConfigError> {
    match v {
        Value::Num(s) => parse_float(s, line),
        other => Err(ConfigError::new(
            line,
            format!("expected a number, found {}", other.kind()),
        )),
    }
}

fn parse_float(s: &str, line: usize) -> Result<f64, ConfigError> {
    match s.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => Err(ConfigError::new(line, format!("'{s}' is not a finite number"))),
    }
}

fn int<T: std::str::FromStr>(v: &Value, line: usize) -> Result<T, ConfigError> {
    match v {
        Value::Num(s) => s.parse::<T>().map_err(|_| {
            ConfigError::new(line, format!("'{s}' is not a nonnegative integer in range"))
        }),
        other => Err(ConfigError::new(
            line,
            format!("expected an integer, found {}", other.kind()),
        )),
    }
}

fn boolean(v: &Value, line: usize) -> Result<bool, ConfigError> {
    match v {
        Value::Bool(b) => Ok(*b),
        other => Err(ConfigError::new(
            line,
            format!("expected true or false, found {}", other.kind()),
        )),
    }
}

fn string(v: &Value, line: usize) -> Result<String, ConfigError> {
    match v {
        Value::Str(s) => Ok(s.clone()),
        other => Err(ConfigError::new(
            line,
            format!("expected a quoted string, found {}", other.kind()),
        )),
    }
}

fn floats(v: &Value, line: usize) -> Result<Vec<f64>, ConfigError> {
    match v {
        Value::Array(items) => items.iter().map(|s| parse_float(s, line)).collect(),
        other => Err(ConfigError::new(
            line,
            format!("expected an array, found {}", other.kind()),
        )),
    }
}

const KEYS: [&str; 28] = [
    "kernel.family",
    "kernel.d",
    "kernel.q",
    "kernel.M",
    "timescale.p",
    "timescale.r_model",
    "timescale.b",
    "timescale.gamma",
    "nonlinearity.lambda",
    "nonlinearity.alpha",
    "nonlinearity.coeffs",
    "nonlinearity.rho",
    "grid.omega_max",
    "grid.n_points",
    "rg.L",
    "rg.n_steps",
    "rg.picard_tol",
    "rg.picard_max_iter",
    "rg.substeps",
    "rg.small_data_override",
    "rg.delta",
    "oracle.T",
    "oracle.steps_per_octave",
    "initial.amplitude",
    "initial.perturbation",
    "seed",
    "contraction.samples",
    "output.dir",
];

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = RunConfig::default();
        let mut seen: HashMap<String, usize> = HashMap::new();
        for (line, key, v) in tokenize(text)? {
            if let Some(first) = seen.insert(key.clone(), line) {
                return Err(ConfigError::new(
                    line,
                    format!("duplicate key '{key}' (first set on line {first})"),
                ));
            }
            let v = &v;
            match key.as_str() {
                "kernel.family" => {
                    cfg.kernel.family = match string(v, line)?.as_str() {
                        "gaussian" => FamilyName::Gaussian,
                        "stable" => FamilyName::Stable,
                        other => {
                            return Err(ConfigError::new(
                                line,
                                format!("unknown kernel family '{other}' (expected gaussian or stable)"),
                            ))
                        }
                    }
                }
                "kernel.d" => cfg.kernel.d = float(v, line)?,
                "kernel.q" => cfg.kernel.q = int(v, line)?,
                "kernel.M" => cfg.kernel.m = int(v, line)?,
                "timescale.p" => cfg.timescale.p = float(v, line)?,
                "timescale.r_model" => {
                    cfg.timescale.r_model = match string(v, line)?.as_str() {
                        "zero" => RModelName::Zero,
                        "power" => RModelName::Power,
                        other => {
                            return Err(ConfigError::new(
                                line,
                                format!("unknown r_model '{other}' (expected zero or power)"),
                            ))
                        }
                    }
                }
                "timescale.b" => cfg.timescale.b = float(v, line)?,
                "timescale.gamma" => cfg.timescale.gamma = float(v, line)?,
                "nonlinearity.lambda" => cfg.nonlinearity.lambda = float(v, line)?,
                "nonlinearity.alpha" => cfg.nonlinearity.alpha = int(v, line)?,
                "nonlinearity.coeffs" => cfg.nonlinearity.coeffs = floats(v, line)?,
                "nonlinearity.rho" => cfg.nonlinearity.rho = float(v, line)?,
                "grid.omega_max" => cfg.grid.omega_max = float(v, line)?,
                "grid.n_points" => cfg.grid.n_points = int(v, line)?,
                "rg.L" => cfg.rg.big_l = float(v, line)?,
                "rg.n_steps" => cfg.rg.n_steps = int(v, line)?,
                "rg.picard_tol" => cfg.rg.picard_tol = float(v, line)?,
                "rg.picard_max_iter" => cfg.rg.picard_max_iter = int(v, line)?,
                "rg.substeps" => cfg.rg.substeps = int(v, line)?,
                "rg.small_data_override" => cfg.rg.small_data_override = boolean(v, line)?,
                "rg.delta" => cfg.rg.delta = Some(float(v, line)?),
                "oracle.T" => cfg.oracle.big_t = float(v, line)?,
                "oracle.steps_per_octave" => cfg.oracle.steps_per_octave = int(v, line)?,
                "initial.amplitude" => cfg.initial.amplitude = float(v, line)?,
                "initial.perturbation" => cfg.initial.perturbation = float(v, line)?,
                "seed" => cfg.seed = int(v, line)?,
                "contraction.samples" => cfg.contraction_samples = int(v, line)?,
                "output.dir" => cfg.output_dir = string(v, line)?,
                _ => return Err(ConfigError::new(line, format!("unknown key '{key}'"))),
            }
        }
        cfg.validate(&seen)?;
        Ok(cfg)
    }

    fn validate(&self, lines: &HashMap<String, usize>) -> Result<(), ConfigError> {
        // report cross-field failures at the first of the named keys that was set
        let at = |keys: &[&str], message: String| {
            let line = keys.iter().filter_map(|k| lines.get(*k)).min().copied().unwrap_or(0);
            ConfigError::new(line, message)
        };
        self.kernel_spec()
            .map_err(|e| at(&["kernel.family", "kernel.d", "kernel.q", "kernel.M"], e.to_string()))?;
        self.spectral_grid()
            .map_err(|e| at(&["grid.omega_max", "grid.n_points", "kernel.q"], e.to_string()))?;
        self.time_scale()
            .map_err(|e| at(&["timescale.p", "timescale.b", "timescale.gamma"], e.to_string()))?;
        self.nonlinearity_spec().map_err(|e| {
            at(
                &["nonlinearity.lambda", "nonlinearity.alpha", "nonlinearity.coeffs", "nonlinearity.rho"],
                e.to_string(),
            )
        })?;
        let rg = &self.rg;
        if rg.big_l <= 1.0 {
            return Err(at(&["rg.L"], format!("rg.L must exceed 1, got {}", rg.big_l)));
        }
        if rg.n_steps == 0 {
            return Err(at(&["rg.n_steps"], "rg.n_steps must be positive".into()));
        }
        if rg.picard_tol <= 0.0 {
            return Err(at(&["rg.picard_tol"], "rg.picard_tol must be positive".into()));
        }
        if rg.picard_max_iter == 0 {
            return Err(at(&["rg.picard_max_iter"], "rg.picard_max_iter must be positive".into()));
        }
        if rg.substeps == 0 {
            return Err(at(&["rg.substeps"], "rg.substeps must be positive".into()));
        }
        if let Some(delta) = rg.delta {
            if !(delta > 0.0 && delta < 1.0) {
                return Err(at(&["rg.delta"], format!("rg.delta must lie in (0, 1), got {delta}")));
            }
        }
        if self.oracle.big_t <= 1.0 {
            return Err(at(&["oracle.T"], format!("oracle.T must exceed 1, got {}", self.oracle.big_t)));
        }
        if self.oracle.steps_per_octave == 0 {
            return Err(at(
                &["oracle.steps_per_octave"],
                "oracle.steps_per_octave must be positive".into(),
            ));
        }
        if self.contraction_samples == 0 {
            return Err(at(&["contraction.samples"], "contraction.samples must be positive".into()));
        }
        if self.output_dir.is_empty() {
            return Err(at(&["output.dir"], "output.dir must not be empty".into()));
        }
        Ok(())
    }

    pub fn kernel_spec(&self) -> crate::Result<KernelSpec> {
        let kc = &self.kernel;
        match kc.family {
            FamilyName::Gaussian => {
                if kc.d != 2.0 {
                    return Err(crate::Error::InvalidArgument(format!(
                        "the Gaussian kernel has d = 2, got kernel.d = {}",
                        kc.d
                    )));
                }
                KernelSpec::gaussian(kc.q, kc.m)
            }
            FamilyName::Stable => KernelSpec::new(KernelFamily::Stable { index: kc.d }, kc.q, kc.m),
        }
    }

    pub fn time_scale(&self) -> crate::Result<TimeScale> {
        let t = &self.timescale;
        let model = match t.r_model {
            RModelName::Zero => RModel::Zero,
            RModelName::Power => RModel::Power {
                b: t.b,
                gamma: t.gamma,
            },
        };
        TimeScale::new(t.p, model)
    }

    pub fn nonlinearity_spec(&self) -> crate::Result<NonlinearitySpec> {
        let n = &self.nonlinearity;
        NonlinearitySpec::new(n.lambda, n.alpha, n.coeffs.clone(), n.rho)
    }

    pub fn spectral_grid(&self) -> crate::Result<SpectralGrid> {
        SpectralGrid::new(self.grid.omega_max, self.grid.n_points, self.kernel.q)
    }

    pub fn picard_options(&self) -> PicardOptions {
        PicardOptions {
            tol: self.rg.picard_tol,
            max_iter: self.rg.picard_max_iter,
            substeps: self.rg.substeps,
            small_data_override: self.rg.small_data_override,
        }
    }

    pub fn march_options(&self) -> MarchOptions {
        MarchOptions {
            steps_per_octave: self.oracle.steps_per_octave,
            ..MarchOptions::default()
        }
    }

    /// All recognized keys, in printing order.
    pub fn keys() -> &'static [&'static str] {
        &KEYS
    }
}

impl fmt::Display for RunConfig {
    /// Canonical form; `RunConfig::parse` of the output yields `self`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let family = match self.kernel.family {
            FamilyName::Gaussian => "gaussian",
            FamilyName::Stable => "stable",
        };
        let r_model = match self.timescale.r_model {
            RModelName::Zero => "zero",
            RModelName::Power => "power",
        };
        let coeffs: Vec<String> = self.nonlinearity.coeffs.iter().map(|c| format!("{c:?}")).collect();
        writeln!(f, "kernel.family = \"{family}\"")?;
        writeln!(f, "kernel.d = {:?}", self.kernel.d)?;
        writeln!(f, "kernel.q = {}", self.kernel.q)?;
        writeln!(f, "kernel.M = {}", self.kernel.m)?;
        writeln!(f, "timescale.p = {:?}", self.timescale.p)?;
        writeln!(f, "timescale.r_model = \"{r_model}\"")?;
        writeln!(f, "timescale.b = {:?}", self.timescale.b)?;
        writeln!(f, "timescale.gamma = {:?}", self.timescale.gamma)?;
        writeln!(f, "nonlinearity.lambda = {:?}", self.nonlinearity.lambda)?;
        writeln!(f, "nonlinearity.alpha = {}", self.nonlinearity.alpha)?;
        writeln!(f, "nonlinearity.coeffs = [{}]", coeffs.join(", "))?;
        writeln!(f, "nonlinearity.rho = {:?}", self.nonlinearity.rho)?;
        writeln!(f, "grid.omega_max = {:?}", self.grid.omega_max)?;
        writeln!(f, "grid.n_points = {}", self.grid.n_points)?;
        writeln!(f, "rg.L = {:?}", self.rg.big_l)?;
        writeln!(f, "rg.n_steps = {}", self.rg.n_steps)?;
        writeln!(f, "rg.picard_tol = {:?}", self.rg.picard_tol)?;
        writeln!(f, "rg.picard_max_iter = {}", self.rg.picard_max_iter)?;
        writeln!(f, "rg.substeps = {}", self.rg.substeps)?;
        writeln!(f, "rg.small_data_override = {}", self.rg.small_data_override)?;
        if let Some(delta) = self.rg.delta {
            writeln!(f, "rg.delta = {delta:?}")?;
        }
        writeln!(f, "oracle.T = {:?}", self.oracle.big_t)?;
        writeln!(f, "oracle.steps_per_octave = {}", self.oracle.steps_per_octave)?;
        writeln!(f, "initial.amplitude = {:?}", self.initial.amplitude)?;
        writeln!(f, "initial.perturbation = {:?}", self.initial.perturbation)?;
        writeln!(f, "seed = {}", self.seed)?;
        writeln!(f, "contraction.samples = {}", self.contraction_samples)?;
        writeln!(f, "output.dir = \"{}\"", self.output_dir)
    }
}
