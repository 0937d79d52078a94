//! Continuum decoherence functionals.
//!
//! The free functional is
//! `Γ₀(t) = ∫ dω I(ω) · 4 coth(ω/2T) · (1 - cos ωt)/ω²`
//! and the pulsed one replaces the free kernel by the pulsed kernel,
//! `Γ_P(N, Δt) = ∫ dω I(ω) · (2/ω²) · coth(ω/2T) · |η(N, ωΔt)|²`,
//! evaluated at the end of the sequence, `t_N = 2NΔt`. Both are split into
//! a vacuum part (`coth → 1`) and a thermal part (`coth → 2n̄`).

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::envmodel::EnvironmentSpec;
use crate::error::{ensure_domain, Error, Result};
use crate::exec::{map_slice, Execution};
use crate::kernels::{free_kernel, interference_factor, pulsed_kernel, PulseSequence};
use crate::quadrature::{self, Mesh, Triple};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QuadratureConfig {
    pub relative_tolerance: f64,
    /// Upper integration limit is `omega_max_factor · ω_c · max(1, n)`.
    pub omega_max_factor: f64,
    pub max_panels: usize,
    pub execution: Execution,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            relative_tolerance: 1e-8,
            omega_max_factor: 30.0,
            max_panels: 1 << 20,
            execution: Execution::default(),
        }
    }
}

impl QuadratureConfig {
    pub fn with_tolerance(relative_tolerance: f64) -> Self {
        Self {
            relative_tolerance,
            ..Self::default()
        }
    }

    pub fn with_execution(self, execution: Execution) -> Self {
        Self { execution, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        ensure_domain(
            self.relative_tolerance > 0.0 && self.relative_tolerance <= 1e-2,
            "relative_tolerance",
            self.relative_tolerance,
            "0 < tolerance <= 1e-2",
        )?;
        ensure_domain(
            self.omega_max_factor >= 10.0 && self.omega_max_factor.is_finite(),
            "omega_max_factor",
            self.omega_max_factor,
            "factor >= 10",
        )?;
        if self.max_panels == 0 {
            return Err(Error::InvalidParameter("max_panels must be positive".into()));
        }
        Ok(())
    }
}

/// A decoherence exponent with its vacuum/thermal split.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DecoherenceResult {
    pub gamma_total: f64,
    pub gamma_vacuum: f64,
    pub gamma_thermal: f64,
    /// `e^{-Γ}`.
    pub coherence: f64,
    pub quadrature_error_estimate: f64,
}

impl DecoherenceResult {
    pub fn zero() -> Self {
        Self {
            gamma_total: 0.0,
            gamma_vacuum: 0.0,
            gamma_thermal: 0.0,
            coherence: 1.0,
            quadrature_error_estimate: 0.0,
        }
    }

    fn from_parts(values: Triple, error: f64) -> Self {
        let [total, vacuum, thermal] = values.map(|v| v.max(0.0));
        Self {
            gamma_total: total,
            gamma_vacuum: vacuum,
            gamma_thermal: thermal,
            coherence: (-total).exp(),
            quadrature_error_estimate: error,
        }
    }

    /// Coherence factor contributed by vacuum fluctuations alone.
    pub fn vacuum_coherence(&self) -> f64 {
        (-self.gamma_vacuum).exp()
    }

    pub fn thermal_coherence(&self) -> f64 {
        (-self.gamma_thermal).exp()
    }
}

/// Thermal weights `(coth, 1, 2n̄)` at frequency ω.
fn weights(env: &EnvironmentSpec, omega: f64) -> Triple {
    if env.is_zero_temperature() {
        [1.0, 1.0, 0.0]
    } else {
        [
            env.thermal_factor_unchecked(omega),
            1.0,
            2.0 * env.occupation_unchecked(omega),
        ]
    }
}

fn weighted(base: f64, w: Triple) -> Triple {
    [base * w[0], base * w[1], base * w[2]]
}

/// Leading power of the free integrand at the origin.
fn origin_exponent(env: &EnvironmentSpec) -> f64 {
    if env.is_zero_temperature() {
        env.ohmicity_n()
    } else {
        env.ohmicity_n() - 1.0
    }
}

fn mesh_for(env: &EnvironmentSpec, time_scale: f64, cfg: &QuadratureConfig) -> Result<Mesh> {
    let upper = env.frequency_ceiling(cfg.omega_max_factor);
    let width = (PI / (4.0 * time_scale)).min(0.25 * env.omega_c() * env.ohmicity_n().max(1.0));
    Mesh::new(upper, width, origin_exponent(env), cfg.max_panels)
}

/// Upper bound on `∫_W^∞ ω^m e^{-ω/ω_c} dω` for `W > m ω_c`.
fn power_exp_tail(m: f64, omega_c: f64, w: f64) -> f64 {
    let ratio = (m.max(0.0) * omega_c / w).min(0.5);
    w.powf(m) * (-w / omega_c).exp() * omega_c / (1.0 - ratio)
}

/// Bound on the integral beyond `ω_max` of `I(ω)(2/ω²) coth · K(ω)` given
/// `K ≤ kernel_cap` everywhere and, optionally, `K ≤ c4 ω⁴`.
fn tail_bound(env: &EnvironmentSpec, upper: f64, kernel_cap: f64, quartic: Option<f64>) -> f64 {
    let pref = 0.25 * env.alpha() * 2.0 * env.thermal_factor_unchecked(upper);
    let n = env.ohmicity_n();
    let flat = kernel_cap * power_exp_tail(n - 2.0, env.omega_c(), upper);
    match quartic {
        Some(c4) => pref * flat.min(c4 * power_exp_tail(n + 2.0, env.omega_c(), upper)),
        None => pref * flat,
    }
}

fn finish(outcome: quadrature::Outcome, tail: f64) -> DecoherenceResult {
    DecoherenceResult::from_parts(outcome.values, outcome.error + tail)
}

/// Value of the free integrand at the origin, where it is finite.
pub fn free_integrand_at_origin(env: &EnvironmentSpec, t: f64) -> f64 {
    let n = env.ohmicity_n();
    if env.is_zero_temperature() || n > 1.0 {
        0.0
    } else if n == 1.0 {
        // (α/4) ω · (2T/ω) · 4 · (ωt)²/2 / ω² → α T t²
        env.alpha() * env.temperature() * t * t
    } else {
        f64::INFINITY
    }
}

fn free_integrand(env: &EnvironmentSpec, t: f64, omega: f64) -> Triple {
    if omega == 0.0 {
        let v = free_integrand_at_origin(env, t);
        let thermal = if env.is_zero_temperature() { 0.0 } else { v };
        return [v, 0.0, thermal];
    }
    // 2 I(ω) · 2(1 - cos ωt)/ω², written to stay accurate for tiny ω
    let s = 2.0 * (0.5 * omega * t).sin() / omega;
    let base = 2.0 * env.density_unchecked(omega) * s * s;
    weighted(base, weights(env, omega))
}

fn pulsed_integrand(env: &EnvironmentSpec, seq: &PulseSequence, omega: f64) -> Triple {
    if omega == 0.0 {
        return [0.0; 3];
    }
    let kernel = pulsed_kernel(seq.cycles(), omega * seq.delta_t());
    let base = 2.0 * env.density_unchecked(omega) * kernel / (omega * omega);
    weighted(base, weights(env, omega))
}

/// Free decoherence exponent `Γ₀(t)`.
pub fn gamma_unperturbed(
    env: &EnvironmentSpec,
    t: f64,
    cfg: &QuadratureConfig,
) -> Result<DecoherenceResult> {
    ensure_domain(t >= 0.0 && t.is_finite(), "t", t, "t >= 0")?;
    cfg.validate()?;
    if t == 0.0 {
        return Ok(DecoherenceResult::zero());
    }
    let mesh = mesh_for(env, t, cfg)?;
    let outcome = quadrature::integrate(
        &mesh,
        |w| free_integrand(env, t, w),
        cfg.relative_tolerance,
        cfg.max_panels,
        cfg.execution,
    )?;
    // 2(1 - cos) ≤ 4 and ≤ (ωt)²
    let tail = tail_bound(env, mesh.upper(), 4.0, None);
    Ok(finish(outcome, tail))
}

/// Pulsed decoherence exponent `Γ_P(N, Δt)` at the end of the sequence.
pub fn gamma_pulsed(
    env: &EnvironmentSpec,
    seq: &PulseSequence,
    cfg: &QuadratureConfig,
) -> Result<DecoherenceResult> {
    cfg.validate()?;
    let mesh = mesh_for(env, seq.total_duration(), cfg)?;
    let outcome = quadrature::integrate(
        &mesh,
        |w| pulsed_integrand(env, seq, w),
        cfg.relative_tolerance,
        cfg.max_panels,
        cfg.execution,
    )?;
    // 4(1 - cos x)² ≤ min(16, x⁴) and D_N ≤ N²
    let n2 = (seq.cycles() as f64).powi(2);
    let tail = tail_bound(env, mesh.upper(), 16.0 * n2, Some(n2 * seq.delta_t().powi(4)));
    Ok(finish(outcome, tail))
}

/// `Γ_P` through the interference-factor form `|ξ(t_N)|² |1 - f|²`,
/// falling back to the pulsed kernel where `f` is undefined.
pub fn gamma_pulsed_interference(
    env: &EnvironmentSpec,
    seq: &PulseSequence,
    cfg: &QuadratureConfig,
) -> Result<DecoherenceResult> {
    cfg.validate()?;
    let total = seq.total_duration();
    let mesh = mesh_for(env, total, cfg)?;
    let one = Complex64::new(1.0, 0.0);
    let outcome = quadrature::integrate(
        &mesh,
        |w| {
            if w == 0.0 {
                return [0.0; 3];
            }
            let kernel = match interference_factor(w, seq) {
                Ok(f) => (one - f).norm_sqr() * free_kernel(w * total),
                Err(_) => pulsed_kernel(seq.cycles(), w * seq.delta_t()),
            };
            let base = 2.0 * env.density_unchecked(w) * kernel / (w * w);
            weighted(base, weights(env, w))
        },
        cfg.relative_tolerance,
        cfg.max_panels,
        cfg.execution,
    )?;
    let n2 = (seq.cycles() as f64).powi(2);
    let tail = tail_bound(env, mesh.upper(), 16.0 * n2, Some(n2 * seq.delta_t().powi(4)));
    Ok(finish(outcome, tail))
}

/// One entry of a pulse-frequency scan.
#[derive(Clone, Debug, PartialEq)]
pub struct ScanPoint {
    pub cycles: u64,
    pub delta_t: f64,
    /// `ω_c Δt`.
    pub omega_c_delta_t: f64,
    /// Normalized pulse frequency `τ_c/Δt = 1/(ω_c Δt)`.
    pub tau_c_over_dt: f64,
    pub result: Result<DecoherenceResult>,
}

/// Splits a fixed window `t` into `N` cycles for every `N` in `n_list`
/// (`Δt = t/2N`) and evaluates `Γ_P` for each, ordered by `N`.
pub fn pulse_frequency_scan(
    env: &EnvironmentSpec,
    t: f64,
    n_list: &[u64],
    cfg: &QuadratureConfig,
) -> Result<Vec<ScanPoint>> {
    ensure_domain(t > 0.0 && t.is_finite(), "t", t, "t > 0")?;
    cfg.validate()?;
    if n_list.contains(&0) {
        return Err(Error::InvalidParameter("cycle counts must be >= 1".into()));
    }
    let mut cycles = n_list.to_vec();
    cycles.sort_unstable();
    Ok(map_slice(cfg.execution, &cycles, |&n| {
        let delta_t = t / (2.0 * n as f64);
        let wc_dt = env.omega_c() * delta_t;
        ScanPoint {
            cycles: n,
            delta_t,
            omega_c_delta_t: wc_dt,
            tau_c_over_dt: 1.0 / wc_dt,
            result: PulseSequence::new(n, delta_t).and_then(|seq| gamma_pulsed(env, &seq, cfg)),
        }
    }))
}

#[derive(Clone, Debug, PartialEq)]
pub struct CurvePoint {
    pub t: f64,
    pub result: Result<DecoherenceResult>,
}

/// `Γ₀` on a strictly increasing grid of non-negative times.
pub fn decoherence_curve(
    env: &EnvironmentSpec,
    t_grid: &[f64],
    cfg: &QuadratureConfig,
) -> Result<Vec<CurvePoint>> {
    cfg.validate()?;
    if t_grid.is_empty() {
        return Err(Error::InvalidParameter("time grid is empty".into()));
    }
    for &t in t_grid {
        ensure_domain(t >= 0.0 && t.is_finite(), "t", t, "t >= 0")?;
    }
    if t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter(
            "time grid must be strictly increasing".into(),
        ));
    }
    Ok(map_slice(cfg.execution, t_grid, |&t| CurvePoint {
        t,
        result: gamma_unperturbed(env, t, cfg),
    }))
}

/// Time constant of the late-time exponential decay `e^{-t/t_th}`, fitted
/// by least squares to `Γ(t)` over the given `(t, Γ)` samples.
pub fn late_time_constant(samples: &[(f64, f64)]) -> Option<f64> {
    if samples.len() < 2 {
        return None;
    }
    let n = samples.len() as f64;
    let mean_t = samples.iter().map(|s| s.0).sum::<f64>() / n;
    let mean_g = samples.iter().map(|s| s.1).sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for &(t, g) in samples {
        sxy += (t - mean_t) * (g - mean_g);
        sxx += (t - mean_t) * (t - mean_t);
    }
    let slope = sxy / sxx;
    (slope > 0.0 && slope.is_finite()).then(|| 1.0 / slope)
}
