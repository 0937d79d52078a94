//! Single-mode dephasing kernels for free and pulsed evolution.
//!
//! All kernels are coupling-stripped: the physical squared displacement of a
//! mode with coupling `g` is `(4|g|²/ω²)` times the value returned here.
//! With `x = ωΔt`, a single spin-flip cycle multiplies the free displacement
//! over `Δt` by `(e^{ix} - 1)`, and `N` equally spaced cycles add a geometric
//! phase sum whose squared magnitude is the Dirichlet kernel
//! `D_N(x) = sin²(Nx)/sin²(x)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{ensure_domain, Error, Result};

/// `|sin x|` below which `D_N` is evaluated around the nearest multiple of π.
pub const REMOVABLE_SIN_THRESHOLD: f64 = 1e-7;

/// `|1 - e^{iωt_N}|` below which the interference factor is undefined.
pub const INTERFERENCE_DENOMINATOR_FLOOR: f64 = 1e-14;

const RECOVERY_TOLERANCE: f64 = 1e-12;

/// `N` complete spin-flip cycles of ideal π kicks spaced `delta_t` apart,
/// starting at `t0`. The sequence holds `2N` pulses and ends at
/// `t0 + 2NΔt`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PulseSequence {
    cycles: u64,
    delta_t: f64,
    t0: f64,
}

impl PulseSequence {
    pub fn new(cycles: u64, delta_t: f64) -> Result<Self> {
        Self::starting_at(cycles, delta_t, 0.0)
    }

    pub fn starting_at(cycles: u64, delta_t: f64, t0: f64) -> Result<Self> {
        if cycles == 0 {
            return Err(Error::InvalidParameter(
                "a pulse sequence needs at least one cycle".into(),
            ));
        }
        ensure_domain(
            delta_t > 0.0 && delta_t.is_finite(),
            "delta_t",
            delta_t,
            "delta_t > 0",
        )?;
        ensure_domain(t0.is_finite(), "t0", t0, "finite start time")?;
        Ok(Self {
            cycles,
            delta_t,
            t0,
        })
    }

    /// Sequence of `cycles` cycles filling a window of length `total`.
    pub fn spanning(cycles: u64, total: f64) -> Result<Self> {
        if cycles == 0 {
            return Err(Error::InvalidParameter(
                "a pulse sequence needs at least one cycle".into(),
            ));
        }
        Self::new(cycles, total / (2.0 * cycles as f64))
    }

    pub fn cycles(&self) -> u64 {
        self.cycles
    }

    pub fn delta_t(&self) -> f64 {
        self.delta_t
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn total_duration(&self) -> f64 {
        2.0 * self.cycles as f64 * self.delta_t
    }

    /// End time of cycle `n` (`n = 0` is the start).
    pub fn cycle_end(&self, n: u64) -> f64 {
        self.t0 + 2.0 * n as f64 * self.delta_t
    }

    /// Times of the `2N` kicks.
    pub fn pulse_times(&self) -> impl Iterator<Item = f64> + '_ {
        (1..=2 * self.cycles).map(move |k| self.t0 + k as f64 * self.delta_t)
    }
}

/// `1 - e^{iθ}` without cancellation at small θ.
pub(crate) fn one_minus_phase(theta: f64) -> Complex64 {
    let half = 0.5 * theta;
    Complex64::new(0.0, -2.0 * half.sin()) * Complex64::from_polar(1.0, half)
}

/// Signed ratio `sin(Nx)/sin(x)`, finite at multiples of π.
pub(crate) fn dirichlet_ratio(cycles: u64, x: f64) -> f64 {
    let n = cycles as f64;
    let s = x.sin();
    if s.abs() >= REMOVABLE_SIN_THRESHOLD {
        return (n * x).sin() / s;
    }
    let m = (x / PI).round();
    let delta = x - m * PI;
    // sin(N(mπ + δ)) / sin(mπ + δ) = (-1)^{m(N-1)} sin(Nδ)/sin(δ)
    let flips = (m.abs() as u64 % 2 == 1) && cycles % 2 == 0;
    let sign = if flips { -1.0 } else { 1.0 };
    let core = if n * delta.abs() < 1e-4 {
        n * (1.0 - (n * n - 1.0) * delta * delta / 6.0)
    } else {
        (n * delta).sin() / delta.sin()
    };
    sign * core
}

/// Dirichlet kernel `sin²(Nx)/sin²(x)`; `N²` at multiples of π.
pub fn dirichlet_kernel(cycles: u64, x: f64) -> f64 {
    let n = cycles as f64;
    let s = x.sin();
    if s.abs() >= REMOVABLE_SIN_THRESHOLD {
        let r = (n * x).sin() / s;
        return r * r;
    }
    let m = (x / PI).round();
    let delta = x - m * PI;
    if n * delta.abs() < 1e-4 {
        n * n * (1.0 - (n * n - 1.0) * delta * delta / 3.0)
    } else {
        let r = (n * delta).sin() / delta.sin();
        r * r
    }
}

/// Free-evolution kernel as a function of the phase `θ = ωt`: `2(1 - cos θ)`.
pub(crate) fn free_kernel(theta: f64) -> f64 {
    let s = (0.5 * theta).sin();
    4.0 * s * s
}

/// Pulsed kernel as a function of `x = ωΔt`: `4(1 - cos x)² D_N(x)`.
pub(crate) fn pulsed_kernel(cycles: u64, x: f64) -> f64 {
    let s = (0.5 * x).sin();
    let s2 = s * s;
    16.0 * s2 * s2 * dirichlet_kernel(cycles, x)
}

/// Coupling-stripped `|ξ(ω, t)|²`, i.e. `2(1 - cos ωt)`.
pub fn xi_sq_norm(omega: f64, t: f64) -> Result<f64> {
    ensure_domain(omega > 0.0, "omega", omega, "omega > 0")?;
    ensure_domain(t >= 0.0, "t", t, "t >= 0")?;
    Ok(free_kernel(omega * t))
}

/// Coupling-stripped `|η(N, ωΔt)|²` for an `N`-cycle sequence.
pub fn eta_sq_norm(omega: f64, seq: &PulseSequence) -> Result<f64> {
    ensure_domain(omega > 0.0, "omega", omega, "omega > 0")?;
    Ok(pulsed_kernel(seq.cycles, omega * seq.delta_t))
}

/// Interference factor `f = 2 ξ(Δt)/ξ(2NΔt) · Σ_{n=1}^{N} e^{2i(n-1)ωΔt}`,
/// which splits the pulsed displacement as `η(N) = ξ(2NΔt)(1 - f)`.
///
/// Fails with [`Error::RemovablePoint`] where `ω·2NΔt` is a multiple of 2π.
pub fn interference_factor(omega: f64, seq: &PulseSequence) -> Result<Complex64> {
    ensure_domain(omega > 0.0, "omega", omega, "omega > 0")?;
    let x = omega * seq.delta_t;
    let n = seq.cycles as f64;
    let denominator = one_minus_phase(2.0 * n * x);
    if denominator.norm() < INTERFERENCE_DENOMINATOR_FLOOR {
        return Err(Error::RemovablePoint {
            omega,
            denominator: denominator.norm(),
        });
    }
    let geometric = Complex64::from_polar(1.0, (n - 1.0) * x) * dirichlet_ratio(seq.cycles, x);
    Ok(2.0 * one_minus_phase(x) / denominator * geometric)
}

/// Checks that flipping the pulse factor `(e^{ix} - 1)` to `(e^{ix} + 1)`
/// turns the pulsed displacement back into the free one over `2NΔt`:
/// `|1 - e^{ix}|² |1 + e^{ix}|² D_N(x) = 2(1 - cos 2Nx)`.
pub fn unperturbed_recovery_check(omega: f64, seq: &PulseSequence) -> Result<bool> {
    ensure_domain(omega > 0.0, "omega", omega, "omega > 0")?;
    let x = omega * seq.delta_t;
    let step = Complex64::from_polar(1.0, 2.0 * x);
    let mut phase = Complex64::new(1.0, 0.0);
    let mut sum = Complex64::new(0.0, 0.0);
    for _ in 0..seq.cycles {
        sum += phase;
        phase *= step;
    }
    let e = Complex64::from_polar(1.0, x);
    let one = Complex64::new(1.0, 0.0);
    let flipped = (one - e) * (one + e) * sum;
    let lhs = flipped.norm_sqr();
    let rhs = free_kernel(2.0 * seq.cycles as f64 * x);
    Ok((lhs - rhs).abs() <= RECOVERY_TOLERANCE * rhs.abs().max(1.0))
}
