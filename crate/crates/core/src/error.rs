use thiserror::Error;

/// Errors raised across the verification library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("evaluation failed: {0}")]
    Evaluation(String),

    #[error("f violates the compatibility equation (residual {residual:e} at u={u}, h={h})")]
    Incompatible { residual: f64, u: f64, h: f64 },

    #[error("degenerate hodograph map: |det J| = {det:e} at u={u}, h={h}")]
    DegenerateMap { det: f64, u: f64, h: f64 },

    #[error("newton iteration did not converge (last iterate u={u}, h={h}, residual {residual:e})")]
    Divergence { u: f64, h: f64, residual: f64 },

    #[error("no grid point could be inverted")]
    EmptyRegion,

    #[error("sonic point: discriminant {discriminant:e} at p={p}")]
    SonicPoint { p: f64, discriminant: f64 },

    #[error("step size underflow at p={p}")]
    StepUnderflow { p: f64 },

    #[error("positivity failure: h={h} in cell {cell} at t={time}")]
    Positivity { cell: usize, h: f64, time: f64 },

    #[error("unsupported Bessel order: c={c} gives imaginary order")]
    UnsupportedOrder { c: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
