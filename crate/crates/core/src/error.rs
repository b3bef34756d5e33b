use thiserror::Error;

/// Errors shared across the solver stack.
#[derive(Debug, Error)]
pub enum Error {
    /// Bad configuration (unknown potential name, malformed spec file, ...).
    #[error("configuration error: {0}")]
    Config(String),

    /// Inputs violate a precondition (non-finite params, atom outside grid, ...).
    #[error("validation error: {0}")]
    Validation(String),

    /// Argument outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A numerical solve broke down (non-finite values, residual blow-up).
    #[error("solver failure: {0}")]
    SolverFailure(String),

    /// |alpha| below the degeneracy threshold: the frequency sits on or next
    /// to a transmission pole (bound state).
    #[error("near-bound-state degeneracy at z = {z_re}+{z_im}i: |alpha| = {alpha_abs:.3e}{}",
            nearest.map(|k| format!(", nearest alpha-zero at kappa = {k:.6}")).unwrap_or_default())]
    DegenerateAlpha {
        z_re: f64,
        z_im: f64,
        alpha_abs: f64,
        nearest: Option<f64>,
    },

    /// The discretized Lippmann-Schwinger system is not reliably invertible.
    #[error("exceptional frequency |xi| = {xi:.6}: condition estimate {cond:.3e}")]
    Exceptional { xi: f64, cond: f64 },

    /// Spectral parameter too close to the spectrum of H.
    #[error("spectral proximity: zeta = {zeta_re}+{zeta_im}i is within {dist:.3e} of sigma(H)")]
    SpectralProximity {
        zeta_re: f64,
        zeta_im: f64,
        dist: f64,
    },

    /// Mismatched grids or otherwise inconsistent call.
    #[error("usage error: {0}")]
    Usage(String),

    /// Some basis columns failed to solve; carries the failed frequencies.
    #[error("partial basis: {} columns failed (first at xi = {})", failed.len(), failed.first().copied().unwrap_or(f64::NAN))]
    PartialBasis { failed: Vec<f64> },

    /// The finite-difference reference solver did not converge.
    #[error("oracle failure: {0}")]
    OracleFailure(String),
}

pub type Result<T> = std::result::Result<T, Error>;
