//! Pure dephasing of a qubit linearly coupled to a bosonic bath, with and
//! without ideal spin-flip ("bang-bang") pulse sequences.
//!
//! The bath enters only through its spectral density (see [`envmodel`]). The
//! closed-form single-mode kernels live in [`kernels`]; [`decoherence`]
//! integrates them against the spectral density; [`oracle`] provides
//! independent brute-force checks (discrete mode sums, exact truncated
//! Fock-space evolution and a Heisenberg-picture single-cycle route); and
//! [`planner`] answers practical questions such as how many cycles are
//! needed to keep a target coherence.

pub mod decoherence;
pub mod envmodel;
pub mod error;
pub mod exec;
pub mod kernels;
pub mod oracle;
pub mod planner;
mod quadrature;

pub use decoherence::{
    decoherence_curve, gamma_pulsed, gamma_pulsed_interference, gamma_unperturbed,
    pulse_frequency_scan, CurvePoint, DecoherenceResult, QuadratureConfig, ScanPoint,
};
pub use envmodel::{bose_occupation, spectral_density, thermal_factor, EnvironmentSpec};
pub use error::{Error, Result};
pub use exec::Execution;
pub use kernels::{
    dirichlet_kernel, eta_sq_norm, interference_factor, unperturbed_recovery_check, xi_sq_norm,
    PulseSequence,
};
pub use quadrature::PANEL_ORDER;
