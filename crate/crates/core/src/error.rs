use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{quantity} = {value} is outside the domain ({requirement})")]
    Domain {
        quantity: &'static str,
        value: f64,
        requirement: &'static str,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The interference factor has a vanishing denominator at this point; the
    /// pulsed kernel must be evaluated directly instead.
    #[error("removable point at omega = {omega}: |1 - exp(i omega t_N)| = {denominator:e}")]
    RemovablePoint { omega: f64, denominator: f64 },

    #[error(
        "quadrature did not converge within {panels} panels \
         (partial value {partial}, error estimate {error_estimate:e})"
    )]
    QuadratureNotConverged {
        partial: f64,
        error_estimate: f64,
        panels: usize,
    },

    #[error("Fock cutoff {cutoff} is inadequate for mode {mode}: {detail}")]
    CutoffInadequate {
        mode: usize,
        cutoff: usize,
        detail: String,
    },

    #[error("Hilbert-space dimension {dimension} exceeds the configured limit {limit}")]
    DimensionLimit { dimension: usize, limit: usize },

    #[error(
        "no cycle count up to {n_limit} reaches coherence {target}; \
         best was {best_coherence} at N = {best_cycles}"
    )]
    PlanInfeasible {
        target: f64,
        n_limit: u64,
        best_cycles: u64,
        best_coherence: f64,
    },
}

pub(crate) fn ensure_domain(
    ok: bool,
    quantity: &'static str,
    value: f64,
    requirement: &'static str,
) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Domain {
            quantity,
            value,
            requirement,
        })
    }
}
