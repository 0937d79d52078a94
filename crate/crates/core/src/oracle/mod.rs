//! Brute-force validators that share no numerics with the continuum engine.
//!
//! * [`mode_sum_gamma`] replaces the spectral integral by a finite sum over
//!   a discretized bath.
//! * [`heisenberg_cycle`] rebuilds a single spin-flip cycle from the
//!   Heisenberg-picture bath solution and the thermal characteristic
//!   function of a displacement.
//! * [`fock`] evolves the full qubit + truncated-bath density matrix.

pub mod fock;

use num_complex::Complex64;
use serde::Serialize;

use crate::envmodel::EnvironmentSpec;
use crate::error::{ensure_domain, Error, Result};
use crate::exec::tree_sum;
use crate::kernels::{eta_sq_norm, xi_sq_norm, PulseSequence};

pub use fock::{fock_evolve, fock_evolve_coherence, Checkpoint, FockBath, FockMode, FockTrajectory};

/// What the qubit undergoes: free evolution for a duration, or a pulse
/// sequence (evaluated at its end).
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Evolution {
    Free(f64),
    Pulsed(PulseSequence),
}

impl Evolution {
    pub fn duration(&self) -> f64 {
        match self {
            Evolution::Free(t) => *t,
            Evolution::Pulsed(seq) => seq.total_duration(),
        }
    }
}

impl From<PulseSequence> for Evolution {
    fn from(seq: PulseSequence) -> Self {
        Evolution::Pulsed(seq)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Mode {
    pub omega: f64,
    /// Coupling weight `|g|²`.
    pub g_sq: f64,
}

/// A discrete bath `{(ω_k, |g_k|²)}` with strictly increasing frequencies.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModeGrid {
    modes: Vec<Mode>,
}

impl ModeGrid {
    pub fn new(modes: Vec<Mode>) -> Result<Self> {
        if modes.is_empty() {
            return Err(Error::InvalidParameter("mode grid is empty".into()));
        }
        for m in &modes {
            ensure_domain(m.omega > 0.0 && m.omega.is_finite(), "omega_k", m.omega, "omega_k > 0")?;
            ensure_domain(m.g_sq >= 0.0 && m.g_sq.is_finite(), "g_sq_k", m.g_sq, "finite |g|² >= 0")?;
        }
        if modes.windows(2).any(|w| w[1].omega <= w[0].omega) {
            return Err(Error::InvalidParameter(
                "mode frequencies must be strictly increasing".into(),
            ));
        }
        Ok(Self { modes })
    }

    pub fn single(omega: f64, g_sq: f64) -> Result<Self> {
        Self::new(vec![Mode { omega, g_sq }])
    }

    /// Uniform midpoint discretization of the spectral density on
    /// `[0, upper]`: `ω_k = (k + ½)Δω`, `|g_k|² = I(ω_k) Δω`.
    pub fn discretize(env: &EnvironmentSpec, upper: f64, count: usize) -> Result<Self> {
        ensure_domain(upper > 0.0 && upper.is_finite(), "upper", upper, "upper > 0")?;
        if count == 0 {
            return Err(Error::InvalidParameter("mode count must be positive".into()));
        }
        let step = upper / count as f64;
        let modes = (0..count)
            .map(|k| {
                let omega = (k as f64 + 0.5) * step;
                Mode {
                    omega,
                    g_sq: env.density_unchecked(omega) * step,
                }
            })
            .collect();
        Self::new(modes)
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }
}

fn coth_half(omega: f64, temperature: f64) -> f64 {
    if temperature == 0.0 {
        1.0
    } else {
        1.0 / (omega / (2.0 * temperature)).tanh()
    }
}

/// `Γ = Σ_k (2|g_k|²/ω_k²) · K_k · coth(ω_k/2T)` with `K` the free or pulsed
/// kernel, summed in a fixed order.
pub fn mode_sum_gamma(grid: &ModeGrid, temperature: f64, evolution: &Evolution) -> Result<f64> {
    ensure_domain(temperature >= 0.0, "temperature", temperature, "T >= 0")?;
    let terms = grid
        .modes
        .iter()
        .map(|m| {
            let kernel = match evolution {
                Evolution::Free(t) => xi_sq_norm(m.omega, *t)?,
                Evolution::Pulsed(seq) => eta_sq_norm(m.omega, seq)?,
            };
            Ok(2.0 * m.g_sq / (m.omega * m.omega) * kernel * coth_half(m.omega, temperature))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(tree_sum(&terms))
}

/// `(Δt - sin ωΔt/ω)` without cancellation at small `ωΔt`.
fn lag(omega: f64, dt: f64) -> f64 {
    let x = omega * dt;
    if x.abs() < 1e-3 {
        let x2 = x * x;
        x * x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0)) / omega
    } else {
        dt - x.sin() / omega
    }
}

/// The two phase sums accumulated over one cycle,
/// `φ₁ = 4 Σ (|g|²/ω)(Δt - sin ωΔt/ω)` and
/// `φ₂ = 8 Σ (|g|²/ω²) sin ωΔt (1 - cos ωΔt)`.
pub fn heisenberg_cycle_phases(grid: &ModeGrid, delta_t: f64) -> Result<(f64, f64)> {
    ensure_domain(delta_t >= 0.0, "delta_t", delta_t, "delta_t >= 0")?;
    let phi_1: Vec<f64> = grid
        .modes
        .iter()
        .map(|m| 4.0 * m.g_sq / m.omega * lag(m.omega, delta_t))
        .collect();
    let phi_2: Vec<f64> = grid
        .modes
        .iter()
        .map(|m| {
            let x = m.omega * delta_t;
            8.0 * m.g_sq / (m.omega * m.omega) * x.sin() * (1.0 - x.cos())
        })
        .collect();
    Ok((tree_sum(&phi_1), tree_sum(&phi_2)))
}

/// Result of the Heisenberg-picture single-cycle route.
#[derive(Clone, Debug, PartialEq)]
pub struct HeisenbergCycle {
    pub phi_1: f64,
    pub phi_2: f64,
    /// Per-mode displacement acquired by `b_k(t₀)` over the cycle.
    pub eta: Vec<Complex64>,
    /// Product of the c-number phase factors sandwiching `σ₊(t₀)`.
    pub phase_factor: Complex64,
    /// `ρ₀₁(t₀ + 2Δt) / ρ₀₁(t₀)`.
    pub coherence_ratio: Complex64,
}

/// Builds one cycle from the Heisenberg bath solution.
///
/// Over the first interval the coherence operator picks up
/// `exp{-Σ(b†(t₀)ξ - h.c.)}`, over the second (after the kick)
/// `exp{+Σ(b†(t_P)ξ - h.c.)}` with the bath operator at the kick
/// `b(t_P) = e^{-iωΔt} b(t₀) - σ_z (g/ω)(1 - e^{-iωΔt})`. The net bath
/// displacement is `η = ξ(e^{iωΔt} - 1)`; its thermal expectation is the
/// symmetric characteristic function `exp(-|η|²(n̄ + ½))`.
pub fn heisenberg_cycle(grid: &ModeGrid, temperature: f64, delta_t: f64) -> Result<HeisenbergCycle> {
    ensure_domain(temperature >= 0.0, "temperature", temperature, "T >= 0")?;
    let (phi_1, phi_2) = heisenberg_cycle_phases(grid, delta_t)?;
    let one = Complex64::new(1.0, 0.0);
    let mut eta = Vec::with_capacity(grid.len());
    let mut log_magnitude = Vec::with_capacity(grid.len());
    for m in &grid.modes {
        let g = m.g_sq.sqrt();
        let phase = Complex64::from_polar(1.0, m.omega * delta_t);
        let xi = 2.0 * g / m.omega * (one - phase);
        // b†(t_P) = e^{iωΔt} b†(t₀) + c-number, so the b†(t₀) coefficients
        // of the two factors add up to:
        let e = -xi + phase * xi;
        let occupation = if temperature == 0.0 {
            0.0
        } else {
            1.0 / (m.omega / temperature).exp_m1()
        };
        log_magnitude.push(-e.norm_sqr() * (occupation + 0.5));
        eta.push(e);
    }
    // σ₊ = |0⟩⟨1| with σ_z|0⟩ = |0⟩: the left factor sees σ_z = +1, the right
    // factor σ_z = -1.
    let (sz_left, sz_right) = (1.0, -1.0);
    let left = Complex64::from_polar(1.0, phi_1 * (1.0 - sz_left) + phi_2);
    let right = Complex64::from_polar(1.0, sz_right * phi_2 - phi_1 * (1.0 + sz_right));
    let phase_factor = left * right;
    let coherence_ratio = phase_factor * tree_sum(&log_magnitude).exp();
    Ok(HeisenbergCycle {
        phi_1,
        phi_2,
        eta,
        phase_factor,
        coherence_ratio,
    })
}

/// `e^{-Γ_P(N = 1, Δt)}` through the Heisenberg route.
pub fn heisenberg_cycle_coherence(grid: &ModeGrid, temperature: f64, delta_t: f64) -> Result<f64> {
    Ok(heisenberg_cycle(grid, temperature, delta_t)?.coherence_ratio.norm())
}
