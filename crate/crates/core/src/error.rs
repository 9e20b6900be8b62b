use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("non-finite sample at x = {x}")]
    NonFinite { x: f64 },

    #[error("grid of {points} points is too small (need at least {required})")]
    GridTooSmall { points: usize, required: usize },

    #[error(
        "adaptive quadrature hit its subdivision limit: estimate {estimate:e}, error bound {error_bound:e}"
    )]
    SubdivisionLimit { estimate: f64, error_bound: f64 },

    #[error("endpoint {x} lies outside [-2pi, 2pi]")]
    OutOfDomain { x: f64 },

    #[error("invalid node set: {0}")]
    InvalidNodes(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("faithful kernel parameter N = {required} exceeds the cap {cap}; use desk mode with an override")]
    KernelCap { required: u64, cap: u64 },

    #[error("balance sign check failed for alpha: Q_r(2pi) = {q_right:e}, Q_l(2pi) = {q_left:e}")]
    AlphaSign { q_right: f64, q_left: f64 },

    #[error("balance sign check failed for gamma: I1 = {i_right:e}, I2 = {i_left:e}")]
    GammaSign { i_right: f64, i_left: f64 },

    #[error("linear program failed: {0}")]
    Lp(String),
}
