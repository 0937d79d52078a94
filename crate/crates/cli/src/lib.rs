//! Library side of the `spinflip` command: configuration, the four tasks
//! and their CSV/JSON writers.

pub mod config;
pub mod verify;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use spinflip_core::planner::{classify_regime, plan_cycles, DEFAULT_CYCLE_LIMIT};
use spinflip_core::{decoherence_curve, gamma_unperturbed, pulse_frequency_scan, EnvironmentSpec};
use thiserror::Error;

pub use config::{ConfigError, ExperimentConfig, Format, TaskKind};
pub use verify::{verify_suite, Check, VerifyScale};

pub const CURVE_HEADER: &str = "t,omega_c_t,gamma_total,gamma_vacuum,gamma_thermal,coherence,quad_err";
pub const SCAN_HEADER: &str = "N,delta_t,tau_c_over_dt,gamma_total,coherence,quad_err";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: io::Error },
    #[error("cannot write output: {0}")]
    Write(#[from] io::Error),
    #[error("numerical failure: {0}")]
    Numerical(#[from] spinflip_core::Error),
    #[error("verification failed: {failed} of {total} checks")]
    VerifyFailed { failed: usize, total: usize },
    #[error("plan infeasible: best coherence {best_coherence} at N = {best_cycles}, limit {n_limit}")]
    PlanInfeasible {
        n_limit: u64,
        best_cycles: u64,
        best_coherence: f64,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::VerifyFailed { .. } => 1,
            CliError::Config(_) | CliError::Read { .. } => 2,
            CliError::Write(_) | CliError::Numerical(_) => 3,
            CliError::PlanInfeasible { .. } => 4,
        }
    }
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(ExperimentConfig::parse(&text)?)
}

/// Fixed scientific formatting, independent of locale.
pub fn fmt_num(v: f64, precision: usize) -> String {
    if v.is_finite() {
        format!("{v:.precision$e}")
    } else {
        format!("{v}")
    }
}

fn json_num(v: f64, precision: usize) -> Value {
    fmt_num(v, precision)
        .parse::<f64>()
        .ok()
        .and_then(serde_json::Number::from_f64)
        .map_or(Value::Null, Value::Number)
}

fn env_json(env: &EnvironmentSpec, p: usize) -> Value {
    json!({
        "alpha": json_num(env.alpha(), p),
        "omega_c": json_num(env.omega_c(), p),
        "ohmicity_n": json_num(env.ohmicity_n(), p),
        "temperature": json_num(env.temperature(), p),
    })
}

fn env_comment(cfg: &ExperimentConfig, env: &EnvironmentSpec, p: usize) -> String {
    let mut s = format!(
        "# alpha={} omega_c={} ohmicity_n={} temperature={}\n",
        fmt_num(env.alpha(), p),
        fmt_num(env.omega_c(), p),
        fmt_num(env.ohmicity_n(), p),
        fmt_num(env.temperature(), p),
    );
    if cfg.has_absolute_units() {
        s.push_str("# units: absolute (frequencies as given for omega_c, times in their inverse)\n");
    } else {
        s.push_str("# units: omega_c = 1\n");
    }
    s
}

fn write_json(out: &mut dyn Write, value: &Value) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    out.write_all(b"\n")
}

/// Writes `Γ₀` on the configured time grid.
pub fn run_curve(cfg: &ExperimentConfig, format: Format, out: &mut dyn Write) -> Result<(), CliError> {
    let env = cfg.environment()?;
    let qcfg = cfg.quadrature_config();
    let grid = cfg.time_grid().map_err(|(_, e)| e)?;
    let p = cfg.output.precision;
    let points = decoherence_curve(&env, &grid, &qcfg)?;
    let wc = env.omega_c();

    let mut failure = None;
    let mut rows = Vec::new();
    let mut json_rows = Vec::new();
    for point in points {
        match point.result {
            Ok(r) => {
                let cols = [
                    point.t,
                    wc * point.t,
                    r.gamma_total,
                    r.gamma_vacuum,
                    r.gamma_thermal,
                    r.coherence,
                    r.quadrature_error_estimate,
                ];
                rows.push(cols.map(|v| fmt_num(v, p)).join(","));
                json_rows.push(json!({
                    "t": json_num(cols[0], p),
                    "omega_c_t": json_num(cols[1], p),
                    "gamma_total": json_num(cols[2], p),
                    "gamma_vacuum": json_num(cols[3], p),
                    "gamma_thermal": json_num(cols[4], p),
                    "coherence": json_num(cols[5], p),
                    "quad_err": json_num(cols[6], p),
                }));
            }
            Err(e) => {
                failure = Some((point.t, e));
                break;
            }
        }
    }

    match format {
        Format::Csv => {
            out.write_all(env_comment(cfg, &env, p).as_bytes())?;
            writeln!(out, "{CURVE_HEADER}")?;
            for row in &rows {
                writeln!(out, "{row}")?;
            }
            if let Some((t, e)) = &failure {
                writeln!(out, "# failed at t={}: {e}", fmt_num(*t, p))?;
            }
        }
        Format::Json => {
            let mut doc = json!({
                "task": "curve",
                "environment": env_json(&env, p),
                "rows": json_rows,
            });
            if let Some((t, e)) = &failure {
                doc["error"] = json!({ "t": json_num(*t, p), "message": e.to_string() });
            }
            write_json(out, &doc)?;
        }
    }
    out.flush()?;
    match failure {
        Some((_, e)) => Err(e.into()),
        None => Ok(()),
    }
}

/// Writes `Γ_P(N, t/2N)` for every configured `N`.
pub fn run_pulse_scan(cfg: &ExperimentConfig, format: Format, out: &mut dyn Write) -> Result<(), CliError> {
    let env = cfg.environment()?;
    let qcfg = cfg.quadrature_config();
    let t = cfg.window()?;
    let cycles = cfg.cycle_list()?;
    let p = cfg.output.precision;
    let reference = gamma_unperturbed(&env, t, &qcfg)?;
    let points = pulse_frequency_scan(&env, t, &cycles, &qcfg)?;

    let mut failure = None;
    let mut rows = Vec::new();
    let mut json_rows = Vec::new();
    for point in points {
        match point.result {
            Ok(r) => {
                let cols = [point.delta_t, point.tau_c_over_dt, r.gamma_total, r.coherence, r.quadrature_error_estimate];
                let rest: Vec<String> = cols.iter().map(|&v| fmt_num(v, p)).collect();
                rows.push(format!("{},{}", point.cycles, rest.join(",")));
                json_rows.push(json!({
                    "N": point.cycles,
                    "delta_t": json_num(cols[0], p),
                    "tau_c_over_dt": json_num(cols[1], p),
                    "gamma_total": json_num(cols[2], p),
                    "coherence": json_num(cols[3], p),
                    "quad_err": json_num(cols[4], p),
                }));
            }
            Err(e) => {
                failure = Some((point.cycles, e));
                break;
            }
        }
    }

    match format {
        Format::Csv => {
            out.write_all(env_comment(cfg, &env, p).as_bytes())?;
            writeln!(out, "# t={} omega_c_t={}", fmt_num(t, p), fmt_num(env.omega_c() * t, p))?;
            writeln!(out, "# unperturbed gamma={}", fmt_num(reference.gamma_total, p))?;
            writeln!(out, "{SCAN_HEADER}")?;
            for row in &rows {
                writeln!(out, "{row}")?;
            }
            if let Some((n, e)) = &failure {
                writeln!(out, "# failed at N={n}: {e}")?;
            }
        }
        Format::Json => {
            let mut doc = json!({
                "task": "pulse-scan",
                "environment": env_json(&env, p),
                "t": json_num(t, p),
                "unperturbed_gamma": json_num(reference.gamma_total, p),
                "rows": json_rows,
            });
            if let Some((n, e)) = &failure {
                doc["error"] = json!({ "N": n, "message": e.to_string() });
            }
            write_json(out, &doc)?;
        }
    }
    out.flush()?;
    match failure {
        Some((_, e)) => Err(e.into()),
        None => Ok(()),
    }
}

/// Runs the oracle agreement suite and prints one line per check.
pub fn run_verify(cfg: Option<&ExperimentConfig>, fast: bool, out: &mut dyn Write) -> Result<(), CliError> {
    let mut scale = if fast { VerifyScale::fast() } else { VerifyScale::full() };
    let (env, qcfg) = match cfg {
        Some(c) => {
            if let Some(m) = c.task.grid_modes {
                scale.grid_modes = m;
            }
            if let Some(k) = c.task.fock_cutoff {
                scale.fock_cutoff = k;
            }
            if let Some(g) = c.task.fock_coupling {
                scale.fock_coupling = g;
            }
            (c.environment()?, c.quadrature_config())
        }
        None => (
            EnvironmentSpec::with_cutoff_ratio(0.25, 1.0, 1.0, 1.0)?,
            spinflip_core::QuadratureConfig::default(),
        ),
    };
    let checks = verify_suite(&env, &qcfg, &scale)?;
    for check in &checks {
        writeln!(out, "{}", check.line())?;
    }
    let failed = checks.iter().filter(|c| !c.passed()).count();
    writeln!(out, "{} of {} checks passed", checks.len() - failed, checks.len())?;
    out.flush()?;
    if failed > 0 {
        return Err(CliError::VerifyFailed {
            failed,
            total: checks.len(),
        });
    }
    Ok(())
}

/// Classifies the regime and searches for the smallest sufficient `N`.
pub fn run_plan(cfg: &ExperimentConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let env = cfg.environment()?;
    let qcfg = cfg.quadrature_config();
    let t = cfg.window()?;
    let p = cfg.output.precision;
    let target = cfg
        .task
        .target_coherence
        .ok_or_else(|| ConfigError {
            line: None,
            field: Some("task.target_coherence".into()),
            message: "target_coherence is required".into(),
        })?;
    let n_limit = cfg.task.n_limit.unwrap_or(DEFAULT_CYCLE_LIMIT);
    let report = classify_regime(&env);

    let mut doc = json!({
        "task": "plan",
        "environment": env_json(&env, p),
        "regime": report.regime.label(),
        "tau_c": json_num(report.tau_c, p),
        "tau_beta": report.tau_beta.map_or(Value::Null, |v| json_num(v, p)),
        "t_dec_estimate": json_num(report.t_dec_estimate, p),
        "t_dec_order_of_magnitude_only": report.order_of_magnitude_only,
        "t": json_num(t, p),
        "target_coherence": json_num(target, p),
        "n_limit": n_limit,
    });
    let outcome = plan_cycles(&env, t, target, n_limit, &qcfg);
    let result = match outcome {
        Ok(plan) => {
            doc["status"] = json!("ok");
            doc["cycles"] = json!(plan.cycles);
            doc["delta_t"] = json_num(plan.delta_t, p);
            doc["omega_c_delta_t"] = json_num(plan.omega_c_delta_t, p);
            doc["coherence"] = json_num(plan.coherence, p);
            Ok(())
        }
        Err(spinflip_core::Error::PlanInfeasible {
            best_cycles,
            best_coherence,
            ..
        }) => {
            doc["status"] = json!("infeasible");
            doc["best_cycles"] = json!(best_cycles);
            doc["best_coherence"] = json_num(best_coherence, p);
            Err(CliError::PlanInfeasible {
                n_limit,
                best_cycles,
                best_coherence,
            })
        }
        Err(e) => return Err(e.into()),
    };
    write_json(out, &doc)?;
    out.flush()?;
    result
}

/// Dispatches a configuration to its task, writing to `out_path` or the
/// configured path, else stdout.
pub fn run(cfg: &ExperimentConfig, out_path: Option<&Path>, format: Option<Format>) -> Result<(), CliError> {
    let format = format.unwrap_or(cfg.output.format);
    let path = out_path
        .map(Path::to_path_buf)
        .or_else(|| cfg.output.path.as_ref().map(PathBuf::from));
    let mut sink: Box<dyn Write> = match &path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    match cfg.task.kind {
        TaskKind::Curve => run_curve(cfg, format, &mut *sink),
        TaskKind::PulseScan => run_pulse_scan(cfg, format, &mut *sink),
        TaskKind::Verify => run_verify(Some(cfg), false, &mut *sink),
        TaskKind::Plan => run_plan(cfg, &mut *sink),
    }
}
