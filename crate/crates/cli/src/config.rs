//! Experiment configuration files.
//!
//! The format is flat `key = value` lines grouped under `[environment]`,
//! `[task]`, `[quadrature]` and `[output]` headers. Times and frequencies
//! are in units of `ω_c` unless `environment.omega_c` is given explicitly.

use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};
use spinflip_core::{EnvironmentSpec, Execution, QuadratureConfig};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub field: Option<String>,
    pub message: String,
}

impl ConfigError {
    fn new(message: impl Into<String>) -> Self {
        Self {
            line: None,
            field: None,
            message: message.into(),
        }
    }

    fn at(mut self, text: Option<&str>, section: &str, key: &str) -> Self {
        self.field = Some(format!("{section}.{key}"));
        self.line = text.and_then(|t| line_of(t, section, key));
        self
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.line, &self.field) {
            (Some(l), Some(k)) => write!(f, "line {l}, field {k}: {}", self.message),
            (Some(l), None) => write!(f, "line {l}: {}", self.message),
            (None, Some(k)) => write!(f, "field {k}: {}", self.message),
            (None, None) => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

/// 1-based line of `key` inside `[section]`.
fn line_of(text: &str, section: &str, key: &str) -> Option<usize> {
    let mut current = "";
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            current = name.trim();
            continue;
        }
        if current == section {
            if let Some(rest) = line.strip_prefix(key) {
                if rest.trim_start().starts_with('=') {
                    return Some(i + 1);
                }
            }
        }
    }
    None
}

fn line_at(text: &str, span: Option<Range<usize>>) -> Option<usize> {
    span.map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub environment: EnvironmentBlock,
    pub task: TaskBlock,
    #[serde(default)]
    pub quadrature: QuadratureBlock,
    #[serde(default)]
    pub output: OutputBlock,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvironmentBlock {
    pub alpha: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_c: Option<f64>,
    #[serde(default = "one")]
    pub ohmicity_n: f64,
    #[serde(rename = "omega_c_over_T", default, skip_serializing_if = "Option::is_none")]
    pub omega_c_over_t: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperature: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zero_temperature: Option<bool>,
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TaskKind {
    Curve,
    PulseScan,
    Verify,
    Plan,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    #[default]
    Log,
    Linear,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskBlock {
    pub kind: TaskKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_start: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_stop: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_spacing: Option<Spacing>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    /// Cycle counts such as `"1..10"` or `"1,2,4,8"` (ranges are inclusive).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_list: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_coherence: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_limit: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_modes: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fock_cutoff: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fock_coupling: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureBlock {
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_factor")]
    pub omega_max_factor: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_panels: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub execution: Option<Execution>,
}

fn default_tolerance() -> f64 {
    QuadratureConfig::default().relative_tolerance
}

fn default_factor() -> f64 {
    QuadratureConfig::default().omega_max_factor
}

impl Default for QuadratureBlock {
    fn default() -> Self {
        Self {
            tolerance: default_tolerance(),
            omega_max_factor: default_factor(),
            max_panels: None,
            execution: None,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    #[serde(default)]
    pub format: Format,
    #[serde(default = "default_precision")]
    pub precision: usize,
}

fn default_precision() -> usize {
    10
}

impl Default for OutputBlock {
    fn default() -> Self {
        Self {
            path: None,
            format: Format::Csv,
            precision: default_precision(),
        }
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(text).map_err(|e| ConfigError {
            line: line_at(text, e.span()),
            field: None,
            message: e.message().trim().to_string(),
        })?;
        cfg.validate_with(Some(text))?;
        Ok(cfg)
    }

    pub fn to_text(&self) -> String {
        toml::to_string(self).expect("configuration is always representable")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.validate_with(None)
    }

    fn validate_with(&self, text: Option<&str>) -> Result<(), ConfigError> {
        let env = &self.environment;
        let given = [
            env.omega_c_over_t.is_some(),
            env.temperature.is_some(),
            env.zero_temperature.is_some(),
        ];
        if given.iter().filter(|&&g| g).count() != 1 {
            return Err(ConfigError::new(
                "exactly one of omega_c_over_T, temperature, zero_temperature is required",
            )
            .at(text, "environment", "alpha"));
        }
        if env.zero_temperature == Some(false) {
            return Err(ConfigError::new("zero_temperature = false gives no temperature")
                .at(text, "environment", "zero_temperature"));
        }
        self.environment()
            .map_err(|e| ConfigError::new(e.to_string()).at(text, "environment", "alpha"))?;
        self.quadrature_config()
            .validate()
            .map_err(|e| ConfigError::new(e.to_string()).at(text, "quadrature", "tolerance"))?;
        if self.output.precision == 0 || self.output.precision > 17 {
            return Err(ConfigError::new("precision must be between 1 and 17")
                .at(text, "output", "precision"));
        }

        let task = &self.task;
        match task.kind {
            TaskKind::Curve => {
                self.time_grid().map_err(|(key, e)| e.at(text, "task", key))?;
            }
            TaskKind::PulseScan => {
                self.window().map_err(|e| e.at(text, "task", "t"))?;
                self.cycle_list().map_err(|e| e.at(text, "task", "n_list"))?;
            }
            TaskKind::Plan => {
                self.window().map_err(|e| e.at(text, "task", "t"))?;
                match task.target_coherence {
                    Some(c) if c > 0.0 && c < 1.0 => {}
                    _ => {
                        return Err(ConfigError::new("target_coherence in (0, 1) is required")
                            .at(text, "task", "target_coherence"))
                    }
                }
                if task.n_limit == Some(0) {
                    return Err(ConfigError::new("n_limit must be >= 1").at(text, "task", "n_limit"));
                }
            }
            TaskKind::Verify => {
                if matches!(task.grid_modes, Some(m) if m < 10) {
                    return Err(ConfigError::new("grid_modes must be >= 10").at(text, "task", "grid_modes"));
                }
                if matches!(task.fock_cutoff, Some(c) if c < 2) {
                    return Err(ConfigError::new("fock_cutoff must be >= 2").at(text, "task", "fock_cutoff"));
                }
            }
        }
        Ok(())
    }

    /// `ω_c` in configured units (1 when not given).
    pub fn omega_c(&self) -> f64 {
        self.environment.omega_c.unwrap_or(1.0)
    }

    pub fn has_absolute_units(&self) -> bool {
        self.environment.omega_c.is_some()
    }

    pub fn environment(&self) -> spinflip_core::Result<EnvironmentSpec> {
        let env = &self.environment;
        let omega_c = self.omega_c();
        let temperature = if let Some(ratio) = env.omega_c_over_t {
            if !(ratio > 0.0 && ratio.is_finite()) {
                return Err(spinflip_core::Error::Domain {
                    quantity: "omega_c_over_T",
                    value: ratio,
                    requirement: "ratio > 0",
                });
            }
            omega_c / ratio
        } else if let Some(t) = env.temperature {
            t
        } else {
            0.0
        };
        EnvironmentSpec::new(env.alpha, omega_c, env.ohmicity_n, temperature)
    }

    pub fn quadrature_config(&self) -> QuadratureConfig {
        let q = &self.quadrature;
        let mut cfg = QuadratureConfig {
            relative_tolerance: q.tolerance,
            omega_max_factor: q.omega_max_factor,
            ..QuadratureConfig::default()
        };
        if let Some(p) = q.max_panels {
            cfg.max_panels = p;
        }
        if let Some(e) = q.execution {
            cfg.execution = e;
        }
        cfg
    }

    pub fn time_grid(&self) -> Result<Vec<f64>, (&'static str, ConfigError)> {
        let task = &self.task;
        let start = task
            .t_start
            .ok_or(("t_start", ConfigError::new("t_start is required")))?;
        let count = task.t_count.unwrap_or(1);
        if count == 0 {
            return Err(("t_count", ConfigError::new("t_count must be >= 1")));
        }
        if !(start >= 0.0 && start.is_finite()) {
            return Err(("t_start", ConfigError::new("t_start must be >= 0")));
        }
        if count == 1 {
            return Ok(vec![start]);
        }
        let stop = task
            .t_stop
            .ok_or(("t_stop", ConfigError::new("t_stop is required when t_count > 1")))?;
        if !(stop > start && stop.is_finite()) {
            return Err(("t_stop", ConfigError::new("t_stop must exceed t_start")));
        }
        let last = (count - 1) as f64;
        Ok(match task.t_spacing.unwrap_or_default() {
            Spacing::Linear => (0..count)
                .map(|i| start + (stop - start) * i as f64 / last)
                .collect(),
            Spacing::Log => {
                if start <= 0.0 {
                    return Err(("t_start", ConfigError::new("log spacing needs t_start > 0")));
                }
                let (a, b) = (start.ln(), stop.ln());
                (0..count)
                    .map(|i| match i {
                        0 => start,
                        i if i + 1 == count => stop,
                        i => (a + (b - a) * i as f64 / last).exp(),
                    })
                    .collect()
            }
        })
    }

    pub fn window(&self) -> Result<f64, ConfigError> {
        match self.task.t {
            Some(t) if t > 0.0 && t.is_finite() => Ok(t),
            Some(_) => Err(ConfigError::new("t must be > 0")),
            None => Err(ConfigError::new("t is required")),
        }
    }

    pub fn cycle_list(&self) -> Result<Vec<u64>, ConfigError> {
        let text = self
            .task
            .n_list
            .as_deref()
            .ok_or_else(|| ConfigError::new("n_list is required"))?;
        parse_cycle_list(text)
    }
}

/// Parses `"1..10"`, `"1,2,4"` or mixtures such as `"1..4,8,16"`.
pub fn parse_cycle_list(text: &str) -> Result<Vec<u64>, ConfigError> {
    let bad = |item: &str| ConfigError::new(format!("cannot read cycle count `{item}`"));
    let mut out = Vec::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if let Some((a, b)) = item.split_once("..") {
            let a: u64 = a.trim().parse().map_err(|_| bad(item))?;
            let b: u64 = b.trim().parse().map_err(|_| bad(item))?;
            if a == 0 || b < a {
                return Err(bad(item));
            }
            out.extend(a..=b);
        } else {
            let n: u64 = item.parse().map_err(|_| bad(item))?;
            if n == 0 {
                return Err(bad(item));
            }
            out.push(n);
        }
    }
    if out.is_empty() {
        return Err(ConfigError::new("n_list is empty"));
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}
