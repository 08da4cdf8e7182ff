use thiserror::Error;

/// Errors surfaced by geometry synthesis, field evaluation, assembly, and solvers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("curve closure iteration did not converge within {iterations} iterations (residual {residual:.3e})")]
    NonClosable { iterations: usize, residual: f64 },

    #[error("closure correction drove curvature negative (min {k_min:.3e} at sample {index})")]
    NegativeCurvature { k_min: f64, index: usize },

    #[error("volume Jacobian 1 + t*k is not positive (min {j_min:.3e}); wall too thick for this curvature")]
    SingularJacobian { j_min: f64 },

    #[error("quotient denominator is numerically zero ({value:.3e})")]
    ZeroDenominator { value: f64 },

    #[error("input matrix is not symmetric (max asymmetry {max_asym:.3e})")]
    NonSymmetricInput { max_asym: f64 },

    #[error("load {lambda} leaves no real in-plane stretch (1 + 2 e1 = {arg:.3e} <= 0)")]
    LoadTooLarge { lambda: f64, arg: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("iterative eigensolver did not converge (residual {residual:.3e} after {iterations} iterations)")]
    SolverDiverged { residual: f64, iterations: usize },

    #[error("test-field support [{lo:.4}, {hi:.4}] does not fit inside the domain")]
    SupportOverflow { lo: f64, hi: f64 },

    #[error("curvature at theta = {theta:.4} is {k:.3e}, not a zero of order {beta}")]
    NotAZero { theta: f64, k: f64, beta: u32 },

    #[error("curvature is not smooth enough near theta = {theta:.4} (estimated k''' = {k3:.3e})")]
    RegularityViolation { theta: f64, k3: f64 },

    #[error("quadrature refinement still differs by {rel:.3e} relative; integrand under-resolved")]
    QuadratureNotConverged { rel: f64 },

    #[error("exponent fit needs at least 3 points, got {got}")]
    TooFewPoints { got: usize },

    #[error("every sweep point failed; last error: {last}")]
    AllPointsFailed { last: String },

    #[error("{0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
