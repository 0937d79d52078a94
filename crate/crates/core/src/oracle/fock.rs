//! Exact evolution of qubit + truncated bosonic bath.
//!
//! The joint density matrix is stored as four bath blocks `ρ_ij`
//! (`i, j ∈ {0, 1}` the qubit indices, `σ_z|0⟩ = |0⟩`). Between kicks the
//! interaction-picture propagator over `[t_a, t_b]` is, up to a c-number
//! phase common to both spin sectors,
//! `exp{(σ_z/2) Σ_k (b_k† ζ_k - b_k ζ_k*)}` with
//! `ζ_k = e^{iω_k t_a} (2g_k/ω_k)(1 - e^{iω_k(t_b - t_a)})`,
//! so each sector evolves by a product of single-mode displacements. An
//! ideal π kick about x swaps the blocks.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{Evolution, Mode, ModeGrid};
use crate::error::{ensure_domain, Error, Result};
use crate::exec::Execution;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

type CMatrix = DMatrix<Complex64>;

/// Thermal weight allowed beyond the cutoff.
pub const THERMAL_TAIL_LIMIT: f64 = 1e-6;
/// Coherent-state weight allowed beyond the cutoff.
pub const COHERENT_TAIL_LIMIT: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FockMode {
    pub omega: f64,
    pub g: Complex64,
}

impl FockMode {
    pub fn new(omega: f64, g: Complex64) -> Self {
        Self { omega, g }
    }

    pub fn real(omega: f64, g: f64) -> Self {
        Self::new(omega, Complex64::new(g, 0.0))
    }
}

/// A handful of exactly simulated bath modes.
#[derive(Clone, Debug, PartialEq)]
pub struct FockBath {
    modes: Vec<FockMode>,
    fock_cutoff: usize,
    temperature: f64,
    dimension_limit: usize,
    substeps: usize,
    execution: Execution,
}

impl FockBath {
    pub const DEFAULT_DIMENSION_LIMIT: usize = 4096;

    pub fn new(modes: Vec<FockMode>, fock_cutoff: usize, temperature: f64) -> Result<Self> {
        Self::with_limit(modes, fock_cutoff, temperature, Self::DEFAULT_DIMENSION_LIMIT)
    }

    pub fn with_limit(
        modes: Vec<FockMode>,
        fock_cutoff: usize,
        temperature: f64,
        dimension_limit: usize,
    ) -> Result<Self> {
        if modes.is_empty() {
            return Err(Error::InvalidParameter("Fock bath has no modes".into()));
        }
        for m in &modes {
            ensure_domain(m.omega > 0.0 && m.omega.is_finite(), "omega", m.omega, "omega > 0")?;
            if !(m.g.re.is_finite() && m.g.im.is_finite()) {
                return Err(Error::InvalidParameter("coupling must be finite".into()));
            }
        }
        if fock_cutoff < 2 {
            return Err(Error::InvalidParameter("Fock cutoff must be at least 2".into()));
        }
        ensure_domain(
            temperature >= 0.0 && temperature.is_finite(),
            "temperature",
            temperature,
            "T >= 0",
        )?;
        let bath = Self {
            modes,
            fock_cutoff,
            temperature,
            dimension_limit,
            substeps: 1,
            execution: Execution::default(),
        };
        let dimension = bath.hilbert_dimension();
        if dimension > dimension_limit {
            return Err(Error::DimensionLimit {
                dimension,
                limit: dimension_limit,
            });
        }
        Ok(bath)
    }

    /// Splits every free interval into `substeps` exactly composed pieces.
    pub fn with_substeps(mut self, substeps: usize) -> Self {
        self.substeps = substeps.max(1);
        self
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }

    pub fn modes(&self) -> &[FockMode] {
        &self.modes
    }

    pub fn fock_cutoff(&self) -> usize {
        self.fock_cutoff
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    /// Total dimension `2 · cutoff^modes` (saturating).
    pub fn hilbert_dimension(&self) -> usize {
        self.modes
            .iter()
            .try_fold(2usize, |acc, _| acc.checked_mul(self.fock_cutoff))
            .unwrap_or(usize::MAX)
    }

    fn bath_dimension(&self) -> usize {
        self.hilbert_dimension() / 2
    }

    /// The same modes as a [`ModeGrid`] with weights `|g_k|²`.
    pub fn mode_grid(&self) -> Result<ModeGrid> {
        let mut modes: Vec<Mode> = self
            .modes
            .iter()
            .map(|m| Mode {
                omega: m.omega,
                g_sq: m.g.norm_sqr(),
            })
            .collect();
        modes.sort_by(|a, b| a.omega.total_cmp(&b.omega));
        ModeGrid::new(modes)
    }

    fn thermal_populations(&self, omega: f64) -> Vec<f64> {
        let mut p: Vec<f64> = if self.temperature == 0.0 {
            (0..self.fock_cutoff).map(|n| if n == 0 { 1.0 } else { 0.0 }).collect()
        } else {
            let r = (-omega / self.temperature).exp();
            (0..self.fock_cutoff).map(|n| r.powi(n as i32)).collect()
        };
        let norm: f64 = p.iter().sum();
        p.iter_mut().for_each(|v| *v /= norm);
        p
    }
}

/// Diagnostics recorded after every free interval (and kick).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Checkpoint {
    pub time: f64,
    pub trace: f64,
    pub population_0: f64,
    pub population_1: f64,
    /// `max |ρ₁₀ - ρ₀₁†|` over bath indices.
    pub hermiticity_defect: f64,
    pub coherence: Complex64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FockTrajectory {
    pub initial_coherence: Complex64,
    /// `⟨0| Tr_B ρ |1⟩` at the end.
    pub coherence: Complex64,
    pub checkpoints: Vec<Checkpoint>,
    /// Largest displacement amplitude reached by each mode.
    pub max_displacement: Vec<f64>,
}

impl FockTrajectory {
    /// `|ρ₀₁(t)| / |ρ₀₁(0)|`.
    pub fn coherence_ratio(&self) -> f64 {
        self.coherence.norm() / self.initial_coherence.norm()
    }
}

struct Segment {
    start: f64,
    end: f64,
    kick_after: bool,
}

fn segments(evolution: &Evolution, substeps: usize) -> Vec<Segment> {
    let intervals: Vec<(f64, f64, bool)> = match evolution {
        Evolution::Free(t) if *t == 0.0 => Vec::new(),
        Evolution::Free(t) => vec![(0.0, *t, false)],
        Evolution::Pulsed(seq) => (0..2 * seq.cycles())
            .map(|k| {
                let a = seq.t0() + k as f64 * seq.delta_t();
                (a, a + seq.delta_t(), true)
            })
            .collect(),
    };
    let mut out = Vec::new();
    for (a, b, kick) in intervals {
        let h = (b - a) / substeps as f64;
        for s in 0..substeps {
            out.push(Segment {
                start: a + s as f64 * h,
                end: if s + 1 == substeps { b } else { a + (s + 1) as f64 * h },
                kick_after: kick && s + 1 == substeps,
            });
        }
    }
    out
}

/// `ζ` for one mode over one free interval.
fn displacement(mode: &FockMode, start: f64, end: f64) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    let xi = 2.0 * mode.g / mode.omega * (one - Complex64::from_polar(1.0, mode.omega * (end - start)));
    Complex64::from_polar(1.0, mode.omega * start) * xi
}

fn poisson_tail(mean: f64, cutoff: usize) -> f64 {
    if mean == 0.0 {
        return 0.0;
    }
    let mut log_term = -mean;
    for n in 1..=cutoff {
        log_term += mean.ln() - (n as f64).ln();
    }
    let mut tail = 0.0;
    let mut n = cutoff;
    loop {
        let term = log_term.exp();
        tail += term;
        n += 1;
        log_term += mean.ln() - (n as f64).ln();
        if term < 1e-30 * tail.max(1e-300) || n > cutoff + 10_000 {
            break;
        }
    }
    tail
}

fn check_cutoff(bath: &FockBath, max_displacement: &[f64]) -> Result<()> {
    let cutoff = bath.fock_cutoff;
    for (k, (mode, &amp)) in bath.modes.iter().zip(max_displacement).enumerate() {
        if bath.temperature > 0.0 {
            let tail = (-(cutoff as f64) * mode.omega / bath.temperature).exp();
            if tail >= THERMAL_TAIL_LIMIT {
                return Err(Error::CutoffInadequate {
                    mode: k,
                    cutoff,
                    detail: format!("thermal weight beyond cutoff is {tail:e}"),
                });
            }
        }
        let tail = poisson_tail(amp * amp, cutoff);
        if tail >= COHERENT_TAIL_LIMIT {
            return Err(Error::CutoffInadequate {
                mode: k,
                cutoff,
                detail: format!("displacement |a| = {amp:.4} leaves weight {tail:e} beyond cutoff"),
            });
        }
    }
    Ok(())
}

fn annihilation(cutoff: usize) -> CMatrix {
    CMatrix::from_fn(cutoff, cutoff, |i, j| {
        if j == i + 1 {
            Complex64::new((j as f64).sqrt(), 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// Truncated `exp(a b† - a* b)`, by Padé scaling and squaring.
fn displacement_matrix(b: &CMatrix, a: Complex64) -> CMatrix {
    let generator = b.adjoint() * a - b * a.conj();
    generator.exp()
}

/// Applies `op` to the index of one mode on the left of `rho`.
///
/// Bath indices are row-major over modes; `stride` is the product of the
/// cutoffs of all later modes.
fn apply_left(rho: &mut CMatrix, op: &CMatrix, stride: usize, exec: Execution) {
    let dim = rho.nrows();
    let cutoff = op.nrows();
    let block = cutoff * stride;
    let column_op = |col: &mut [Complex64]| {
        let mut gathered = vec![Complex64::new(0.0, 0.0); cutoff];
        for outer in (0..dim).step_by(block) {
            for inner in 0..stride {
                for (j, slot) in gathered.iter_mut().enumerate() {
                    *slot = col[outer + j * stride + inner];
                }
                for i in 0..cutoff {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (j, v) in gathered.iter().enumerate() {
                        acc += op[(i, j)] * v;
                    }
                    col[outer + i * stride + inner] = acc;
                }
            }
        }
    };
    let data = rho.as_mut_slice();
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        data.par_chunks_mut(dim).for_each(column_op);
        return;
    }
    let _ = exec;
    data.chunks_mut(dim).for_each(column_op);
}

/// `ρ ← (⊗ L_k) ρ (⊗ R_k)†`.
fn sandwich(rho: &mut CMatrix, left: &[CMatrix], right: &[CMatrix], strides: &[usize], exec: Execution) {
    for (op, &stride) in left.iter().zip(strides) {
        apply_left(rho, op, stride, exec);
    }
    let mut adj = rho.adjoint();
    for (op, &stride) in right.iter().zip(strides) {
        apply_left(&mut adj, op, stride, exec);
    }
    *rho = adj.adjoint();
}

fn checkpoint(time: f64, blocks: &[CMatrix; 4]) -> Checkpoint {
    let [r00, r01, r10, r11] = blocks;
    let population_0 = r00.trace().re;
    let population_1 = r11.trace().re;
    let hermiticity_defect = (r10 - r01.adjoint())
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    Checkpoint {
        time,
        trace: population_0 + population_1,
        population_0,
        population_1,
        hermiticity_defect,
        coherence: r01.trace(),
    }
}

/// Evolves `|+⟩⟨+| ⊗ ρ_th` through `evolution` and records diagnostics.
pub fn fock_evolve(bath: &FockBath, evolution: &Evolution) -> Result<FockTrajectory> {
    let dimension = bath.hilbert_dimension();
    if dimension > bath.dimension_limit {
        return Err(Error::DimensionLimit {
            dimension,
            limit: bath.dimension_limit,
        });
    }
    if let Evolution::Free(t) = evolution {
        ensure_domain(*t >= 0.0 && t.is_finite(), "t", *t, "t >= 0")?;
    }
    let plan = segments(evolution, bath.substeps);

    // Displacement carried by the bath component attached to |0⟩ initially.
    let mut max_displacement = vec![0.0f64; bath.modes.len()];
    let mut running = vec![Complex64::new(0.0, 0.0); bath.modes.len()];
    let mut sign = 1.0;
    for seg in &plan {
        for (k, mode) in bath.modes.iter().enumerate() {
            running[k] += sign * 0.5 * displacement(mode, seg.start, seg.end);
            max_displacement[k] = max_displacement[k].max(running[k].norm());
        }
        if seg.kick_after {
            sign = -sign;
        }
    }
    check_cutoff(bath, &max_displacement)?;

    let cutoff = bath.fock_cutoff;
    let n_modes = bath.modes.len();
    let dim = bath.bath_dimension();
    let strides: Vec<usize> = (0..n_modes)
        .map(|k| cutoff.pow((n_modes - 1 - k) as u32))
        .collect();

    let populations: Vec<Vec<f64>> = bath.modes.iter().map(|m| bath.thermal_populations(m.omega)).collect();
    let thermal = CMatrix::from_fn(dim, dim, |r, c| {
        if r != c {
            return Complex64::new(0.0, 0.0);
        }
        let weight: f64 = strides
            .iter()
            .zip(&populations)
            .map(|(&s, p)| p[(r / s) % cutoff])
            .product();
        Complex64::new(0.5 * weight, 0.0)
    });
    let mut blocks = [thermal.clone(), thermal.clone(), thermal.clone(), thermal];
    let initial = checkpoint(0.0, &blocks);
    let mut checkpoints = vec![initial];

    let b = annihilation(cutoff);
    for seg in &plan {
        // sector s = +1 for |0⟩, -1 for |1⟩; each sector displaces by s ζ/2
        let mut plus = Vec::with_capacity(n_modes);
        let mut minus = Vec::with_capacity(n_modes);
        for mode in &bath.modes {
            let half = 0.5 * displacement(mode, seg.start, seg.end);
            plus.push(displacement_matrix(&b, half));
            minus.push(displacement_matrix(&b, -half));
        }
        let sectors = [&plus, &minus];
        for i in 0..2 {
            for j in 0..2 {
                sandwich(&mut blocks[2 * i + j], sectors[i], sectors[j], &strides, bath.execution);
            }
        }
        if seg.kick_after {
            blocks.swap(0, 3);
            blocks.swap(1, 2);
        }
        checkpoints.push(checkpoint(seg.end, &blocks));
    }

    Ok(FockTrajectory {
        initial_coherence: initial.coherence,
        coherence: blocks[1].trace(),
        checkpoints,
        max_displacement,
    })
}

/// `⟨0| Tr_B ρ(t) |1⟩` for the initial state `|+⟩⟨+| ⊗ ρ_th`.
pub fn fock_evolve_coherence(bath: &FockBath, evolution: &Evolution) -> Result<Complex64> {
    Ok(fock_evolve(bath, evolution)?.coherence)
}
