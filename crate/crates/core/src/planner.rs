//! Regime classification and pulse-rate planning.
//!
//! The regime thresholds are a reporting convention at a factor of ten on
//! either side of `ω_c = T`; the decoherence-time estimates attached to them
//! are order-of-magnitude labels and are never used by the search.

use serde::Serialize;

use crate::decoherence::{gamma_pulsed, QuadratureConfig};
use crate::envmodel::EnvironmentSpec;
use crate::error::{ensure_domain, Error, Result};
use crate::exec::map_slice;
use crate::kernels::PulseSequence;

/// Below this `ω_c/T` the bath is classical.
pub const CLASSICAL_RATIO: f64 = 0.1;
/// Above this `ω_c/T` the bath is quantum.
pub const QUANTUM_RATIO: f64 = 10.0;
/// Default largest cycle count tried by the planner.
pub const DEFAULT_CYCLE_LIMIT: u64 = 1_000_000;
/// Widest range scanned linearly once the coherence is seen to be non-monotone in `N`.
pub const LINEAR_SCAN_CAP: u64 = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Regime {
    #[serde(rename = "classical_high_T")]
    ClassicalHighT,
    #[serde(rename = "quantum_low_T")]
    QuantumLowT,
    #[serde(rename = "crossover")]
    Crossover,
}

impl Regime {
    pub fn label(self) -> &'static str {
        match self {
            Regime::ClassicalHighT => "classical_high_T",
            Regime::QuantumLowT => "quantum_low_T",
            Regime::Crossover => "crossover",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RegimeReport {
    pub regime: Regime,
    pub tau_c: f64,
    /// `1/T`; absent at zero temperature.
    pub tau_beta: Option<f64>,
    pub t_dec_estimate: f64,
    /// Set when the estimate has no thermal scale to lean on (T = 0).
    pub order_of_magnitude_only: bool,
}

pub fn classify_regime(env: &EnvironmentSpec) -> RegimeReport {
    let tau_c = 1.0 / env.omega_c();
    let alpha = env.alpha();
    if env.is_zero_temperature() {
        return RegimeReport {
            regime: Regime::QuantumLowT,
            tau_c,
            tau_beta: None,
            t_dec_estimate: tau_c / alpha,
            order_of_magnitude_only: true,
        };
    }
    let tau_beta = 1.0 / env.temperature();
    let ratio = env.omega_c() / env.temperature();
    let (regime, t_dec_estimate) = if ratio < CLASSICAL_RATIO {
        (Regime::ClassicalHighT, tau_c / alpha)
    } else if ratio > QUANTUM_RATIO {
        (Regime::QuantumLowT, tau_beta / alpha)
    } else {
        (Regime::Crossover, (tau_c / alpha).min(tau_beta / alpha))
    };
    RegimeReport {
        regime,
        tau_c,
        tau_beta: Some(tau_beta),
        t_dec_estimate,
        order_of_magnitude_only: false,
    }
}

/// Outcome of a successful cycle search.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CyclePlan {
    pub cycles: u64,
    pub delta_t: f64,
    pub omega_c_delta_t: f64,
    pub coherence: f64,
    /// Smallest `N` below `cycles` that was checked to fail; every count in
    /// `(verified_from, cycles)` was evaluated when the search scanned.
    pub verified_from: u64,
    pub evaluations: usize,
}

struct Search<'a> {
    env: &'a EnvironmentSpec,
    t: f64,
    cfg: &'a QuadratureConfig,
    seen: Vec<(u64, f64)>,
}

impl Search<'_> {
    fn coherence(&mut self, n: u64) -> Result<f64> {
        if let Some(&(_, c)) = self.seen.iter().find(|(m, _)| *m == n) {
            return Ok(c);
        }
        let seq = PulseSequence::spanning(n, self.t)?;
        let c = gamma_pulsed(self.env, &seq, self.cfg)?.coherence;
        self.seen.push((n, c));
        Ok(c)
    }

    fn best(&self) -> (u64, f64) {
        self.seen
            .iter()
            .copied()
            .fold((0, f64::NEG_INFINITY), |b, s| if s.1 > b.1 { s } else { b })
    }

    /// True if the evaluated coherences are not non-decreasing in `N`.
    fn non_monotone(&self) -> bool {
        let mut sorted = self.seen.clone();
        sorted.sort_by_key(|s| s.0);
        sorted.windows(2).any(|w| w[1].1 < w[0].1)
    }
}

/// Smallest `N` with `exp(-Γ_P(N, t/2N)) ≥ target`, searching up to the
/// default limit.
pub fn min_cycles_for_target(
    env: &EnvironmentSpec,
    t: f64,
    target: f64,
    cfg: &QuadratureConfig,
) -> Result<u64> {
    Ok(plan_cycles(env, t, target, DEFAULT_CYCLE_LIMIT, cfg)?.cycles)
}

/// Exponential bracketing then bisection on `N`, falling back to a linear
/// scan below the bracket end when the evaluated coherences are not
/// monotone in `N`.
pub fn plan_cycles(
    env: &EnvironmentSpec,
    t: f64,
    target: f64,
    n_limit: u64,
    cfg: &QuadratureConfig,
) -> Result<CyclePlan> {
    ensure_domain(t > 0.0 && t.is_finite(), "t", t, "t > 0")?;
    ensure_domain(target > 0.0 && target < 1.0, "target_coherence", target, "0 < target < 1")?;
    if n_limit == 0 {
        return Err(Error::InvalidParameter("cycle limit must be >= 1".into()));
    }
    cfg.validate()?;
    let mut search = Search { env, t, cfg, seen: Vec::new() };

    let mut lo = 0u64;
    let mut n = 1u64;
    let hi = loop {
        if search.coherence(n)? >= target {
            break n;
        }
        if n == n_limit {
            let (best_cycles, best_coherence) = search.best();
            return Err(Error::PlanInfeasible {
                target,
                n_limit,
                best_cycles,
                best_coherence,
            });
        }
        lo = n;
        n = n.saturating_mul(2).min(n_limit);
    };
    let bracket_lo = lo;

    let mut hi = hi;
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if search.coherence(mid)? >= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }

    let mut verified_from = lo;
    if search.non_monotone() {
        let start = bracket_lo.max(hi.saturating_sub(LINEAR_SCAN_CAP)) + 1;
        let candidates: Vec<u64> = (start..hi).collect();
        let values = map_slice(cfg.execution, &candidates, |&m| {
            PulseSequence::spanning(m, t)
                .and_then(|seq| gamma_pulsed(env, &seq, cfg))
                .map(|r| r.coherence)
        });
        for (&m, v) in candidates.iter().zip(values) {
            search.seen.push((m, v?));
        }
        if let Some(&m) = candidates
            .iter()
            .find(|&&m| search.seen.iter().any(|&(k, c)| k == m && c >= target))
        {
            hi = m;
        }
        verified_from = start - 1;
    }

    let coherence = search.coherence(hi)?;
    let delta_t = t / (2.0 * hi as f64);
    Ok(CyclePlan {
        cycles: hi,
        delta_t,
        omega_c_delta_t: env.omega_c() * delta_t,
        coherence,
        verified_from,
        evaluations: search.seen.len(),
    })
}
