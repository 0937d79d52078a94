//! Bath model: power-law spectral densities with an exponential cutoff and
//! the thermal occupation factors that weight them.
//!
//! Units throughout have ħ = k_B = 1, so temperature is an energy (equivalently
//! a frequency) and times are inverse frequencies.

use serde::Serialize;

use crate::error::{ensure_domain, Error, Result};

/// Below this value of ω/2T the hyperbolic cotangent is evaluated by its
/// two-term Laurent series.
pub const COTH_SERIES_THRESHOLD: f64 = 1e-8;

/// Parameters of a dephasing bath with spectral density
/// `I(ω) = (α/4) ωⁿ e^{-ω/ω_c}` held at temperature `T` (zero allowed).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EnvironmentSpec {
    alpha: f64,
    omega_c: f64,
    ohmicity_n: f64,
    temperature: f64,
}

impl EnvironmentSpec {
    pub fn new(alpha: f64, omega_c: f64, ohmicity_n: f64, temperature: f64) -> Result<Self> {
        ensure_domain(alpha > 0.0 && alpha.is_finite(), "alpha", alpha, "alpha > 0")?;
        ensure_domain(omega_c > 0.0 && omega_c.is_finite(), "omega_c", omega_c, "omega_c > 0")?;
        ensure_domain(
            ohmicity_n > 0.0 && ohmicity_n.is_finite(),
            "ohmicity_n",
            ohmicity_n,
            "n > 0",
        )?;
        ensure_domain(
            temperature >= 0.0 && temperature.is_finite(),
            "temperature",
            temperature,
            "T >= 0",
        )?;
        Ok(Self {
            alpha,
            omega_c,
            ohmicity_n,
            temperature,
        })
    }

    /// Ohmic bath (`n = 1`).
    pub fn ohmic(alpha: f64, omega_c: f64, temperature: f64) -> Result<Self> {
        Self::new(alpha, omega_c, 1.0, temperature)
    }

    /// Bath whose temperature is given through the ratio `ω_c / T`.
    pub fn with_cutoff_ratio(
        alpha: f64,
        omega_c: f64,
        ohmicity_n: f64,
        omega_c_over_t: f64,
    ) -> Result<Self> {
        ensure_domain(
            omega_c_over_t > 0.0 && omega_c_over_t.is_finite(),
            "omega_c_over_T",
            omega_c_over_t,
            "ratio > 0",
        )?;
        Self::new(alpha, omega_c, ohmicity_n, omega_c / omega_c_over_t)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn omega_c(&self) -> f64 {
        self.omega_c
    }

    pub fn ohmicity_n(&self) -> f64 {
        self.ohmicity_n
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    pub fn is_zero_temperature(&self) -> bool {
        self.temperature == 0.0
    }

    /// Same bath at a different temperature.
    pub fn at_temperature(&self, temperature: f64) -> Result<Self> {
        Self::new(self.alpha, self.omega_c, self.ohmicity_n, temperature)
    }

    /// Frequency beyond which the spectral density is negligible,
    /// `factor · ω_c · max(1, n)`.
    pub fn frequency_ceiling(&self, factor: f64) -> f64 {
        factor * self.omega_c * self.ohmicity_n.max(1.0)
    }

    pub(crate) fn density_unchecked(&self, omega: f64) -> f64 {
        let power = if self.ohmicity_n == 1.0 {
            omega
        } else {
            omega.powf(self.ohmicity_n)
        };
        0.25 * self.alpha * power * (-omega / self.omega_c).exp()
    }

    pub(crate) fn thermal_factor_unchecked(&self, omega: f64) -> f64 {
        if self.temperature == 0.0 {
            return 1.0;
        }
        let x = omega / (2.0 * self.temperature);
        if x < COTH_SERIES_THRESHOLD {
            1.0 / x + x / 3.0
        } else {
            1.0 / x.tanh()
        }
    }

    pub(crate) fn occupation_unchecked(&self, omega: f64) -> f64 {
        if self.temperature == 0.0 {
            0.0
        } else {
            1.0 / (omega / self.temperature).exp_m1()
        }
    }
}

/// Spectral density `I(ω) = (α/4) ωⁿ e^{-ω/ω_c}`.
pub fn spectral_density(env: &EnvironmentSpec, omega: f64) -> Result<f64> {
    ensure_domain(omega >= 0.0, "omega", omega, "omega >= 0")?;
    if omega == 0.0 {
        return Ok(0.0);
    }
    Ok(env.density_unchecked(omega))
}

/// `coth(ω/2T)`; exactly 1 at zero temperature.
pub fn thermal_factor(env: &EnvironmentSpec, omega: f64) -> Result<f64> {
    ensure_domain(omega > 0.0, "omega", omega, "omega > 0")?;
    Ok(env.thermal_factor_unchecked(omega))
}

/// Bose occupation `1/(e^{ω/T} - 1)`, so that `2n̄ + 1 = coth(ω/2T)`.
pub fn bose_occupation(env: &EnvironmentSpec, omega: f64) -> Result<f64> {
    ensure_domain(omega > 0.0, "omega", omega, "omega > 0")?;
    Ok(env.occupation_unchecked(omega))
}

impl TryFrom<(f64, f64, f64, f64)> for EnvironmentSpec {
    type Error = Error;

    fn try_from((alpha, omega_c, n, temperature): (f64, f64, f64, f64)) -> Result<Self> {
        Self::new(alpha, omega_c, n, temperature)
    }
}
