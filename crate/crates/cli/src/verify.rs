//! Cross-checks between the continuum quadrature and the oracles.

use num_complex::Complex64;
use spinflip_core::oracle::{
    fock_evolve, heisenberg_cycle_coherence, mode_sum_gamma, Evolution, FockBath, FockMode, Mode,
    ModeGrid,
};
use spinflip_core::{gamma_pulsed, gamma_unperturbed, EnvironmentSpec, Error, PulseSequence, QuadratureConfig};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VerifyScale {
    pub grid_modes: usize,
    pub fock_cutoff: usize,
    /// Coupling of the first Fock mode in units of `ω_c`.
    pub fock_coupling: f64,
}

impl VerifyScale {
    pub fn full() -> Self {
        Self {
            grid_modes: 2000,
            fock_cutoff: 40,
            fock_coupling: 0.2,
        }
    }

    pub fn fast() -> Self {
        Self {
            grid_modes: 1000,
            fock_cutoff: 16,
            fock_coupling: 0.2,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub delta: f64,
    pub tolerance: f64,
    pub note: Option<String>,
}

impl Check {
    fn new(name: impl Into<String>, delta: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            delta,
            tolerance,
            note: None,
        }
    }

    fn failed(name: impl Into<String>, note: String) -> Self {
        Self {
            name: name.into(),
            delta: f64::INFINITY,
            tolerance: 0.0,
            note: Some(note),
        }
    }

    pub fn passed(&self) -> bool {
        self.delta <= self.tolerance
    }

    pub fn line(&self) -> String {
        let status = if self.passed() { "PASS" } else { "FAIL" };
        match &self.note {
            Some(note) => format!("{status} {}: {note}", self.name),
            None => format!(
                "{status} {}: delta={:.3e} tol={:.0e}",
                self.name, self.delta, self.tolerance
            ),
        }
    }
}

fn relative(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

/// Runs the agreement suite. Errors other than an inadequate Fock cutoff
/// abort the run.
pub fn verify_suite(
    env: &EnvironmentSpec,
    cfg: &QuadratureConfig,
    scale: &VerifyScale,
) -> Result<Vec<Check>, Error> {
    let wc = env.omega_c();
    let temperature = env.temperature();
    let mut checks = Vec::new();

    let grid = ModeGrid::discretize(env, env.frequency_ceiling(cfg.omega_max_factor), scale.grid_modes)?;
    let t = 2.0 / wc;
    let free = gamma_unperturbed(env, t, cfg)?.gamma_total;
    let sum = mode_sum_gamma(&grid, temperature, &Evolution::Free(t))?;
    checks.push(Check::new(
        format!("mode sum vs quadrature, free, {} modes", scale.grid_modes),
        relative(free, sum),
        1e-3,
    ));
    for n in [1u64, 4, 20] {
        let seq = PulseSequence::spanning(n, t)?;
        let q = gamma_pulsed(env, &seq, cfg)?.gamma_total;
        let s = mode_sum_gamma(&grid, temperature, &Evolution::Pulsed(seq))?;
        checks.push(Check::new(
            format!("mode sum vs quadrature, N={n}"),
            relative(q, s),
            1e-3,
        ));
    }

    let small = ModeGrid::new(vec![
        Mode { omega: 0.5 * wc, g_sq: 0.010 * wc * wc },
        Mode { omega: wc, g_sq: 0.020 * wc * wc },
        Mode { omega: 1.7 * wc, g_sq: 0.015 * wc * wc },
    ])?;
    let delta_t = 0.4 / wc;
    let route = heisenberg_cycle_coherence(&small, temperature, delta_t)?;
    let direct = (-mode_sum_gamma(&small, temperature, &Evolution::Pulsed(PulseSequence::new(1, delta_t)?))?).exp();
    checks.push(Check::new("Heisenberg cycle vs mode sum, N=1", relative(route, direct), 1e-12));

    let g = scale.fock_coupling * wc;
    let one = vec![FockMode::real(wc, g)];
    let two = vec![FockMode::real(wc, g), FockMode::real(1.7 * wc, 0.8 * g)];
    for (label, modes) in [("1 mode", one.clone()), ("2 modes", two)] {
        for (t_label, fock_t) in [("T=0", 0.0), ("T=omega/2", 0.5 * wc)] {
            let name = format!("Fock {label}, cutoff {}, {t_label}", scale.fock_cutoff);
            checks.push(fock_check(name, modes.clone(), scale.fock_cutoff, fock_t, wc)?);
        }
    }
    checks.push(invariant_check(one, scale.fock_cutoff, 0.5 * wc, wc)?);
    Ok(checks)
}

fn fock_check(name: String, modes: Vec<FockMode>, cutoff: usize, temperature: f64, wc: f64) -> Result<Check, Error> {
    let bath = FockBath::new(modes, cutoff, temperature)?;
    let grid = bath.mode_grid()?;
    let mut worst = 0.0f64;
    let evolutions = [
        Evolution::Free(1.6 / wc),
        Evolution::Pulsed(PulseSequence::new(1, 0.8 / wc)?),
    ];
    for evolution in &evolutions {
        let traj = match fock_evolve(&bath, evolution) {
            Ok(traj) => traj,
            Err(e @ Error::CutoffInadequate { .. }) => return Ok(Check::failed(name, e.to_string())),
            Err(e) => return Err(e),
        };
        let analytic = (-mode_sum_gamma(&grid, temperature, evolution)?).exp();
        worst = worst.max((traj.coherence_ratio() - analytic).abs());
    }
    Ok(Check::new(name, worst, 1e-6))
}

/// Trace, populations and coupling-phase invariance over three cycles.
fn invariant_check(modes: Vec<FockMode>, cutoff: usize, temperature: f64, wc: f64) -> Result<Check, Error> {
    let name = "Fock invariants (trace, populations, coupling phase)";
    let seq = PulseSequence::new(3, 0.6 / wc)?;
    let bath = FockBath::new(modes.clone(), cutoff, temperature)?;
    let traj = match fock_evolve(&bath, &Evolution::Pulsed(seq)) {
        Ok(traj) => traj,
        Err(e @ Error::CutoffInadequate { .. }) => return Ok(Check::failed(name, e.to_string())),
        Err(e) => return Err(e),
    };
    let mut worst = 0.0f64;
    for c in &traj.checkpoints {
        worst = worst
            .max((c.trace - 1.0).abs())
            .max((c.population_0 - 0.5).abs())
            .max((c.population_1 - 0.5).abs());
    }
    let rotated: Vec<FockMode> = modes
        .iter()
        .map(|m| FockMode::new(m.omega, m.g * Complex64::from_polar(1.0, 1.234)))
        .collect();
    let turned = FockBath::new(rotated, cutoff, temperature)?;
    match fock_evolve(&turned, &Evolution::Pulsed(seq)) {
        Ok(other) => worst = worst.max((other.coherence.norm() - traj.coherence.norm()).abs()),
        Err(e @ Error::CutoffInadequate { .. }) => return Ok(Check::failed(name, e.to_string())),
        Err(e) => return Err(e),
    }
    Ok(Check::new(name, worst, 1e-10))
}
