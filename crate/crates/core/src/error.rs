//! Error type shared by every module of the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("field length {got} does not match grid size {expected}")]
    FieldSize { expected: usize, got: usize },

    #[error("phi1 - i*phi2 vanishes at node ({0}, {1}): Gauss map leaves the affine chart (g = infinity)")]
    DivisionAtNode(usize, usize),

    #[error("normal vector is at the north pole (g = infinity)")]
    NorthPole,

    #[error("g^2 = conj(g)^2 at node ({0}, {1}): f = 2 conj(g)_z / (g^2 - conj(g)^2) is undefined")]
    SingularSet(usize, usize),

    #[error("point {re} + {im}i lies on the singular set of the target metric")]
    OnSingularSet { re: f64, im: f64 },

    #[error("denominator of the Gauss map equation vanishes at this jet")]
    DegenerateDenominator,

    #[error("no singular target metric exists for (mu1, mu2) = ({mu1}, {mu2}); need mu1^2 = mu2^2 != 0")]
    NoTargetMetric { mu1: f64, mu2: f64 },

    #[error("Weierstrass data residual {max} exceeds gate threshold {threshold}")]
    ResidualTooLarge { max: f64, threshold: f64 },

    #[error("exponential weight overflowed at node ({0}, {1})")]
    Overflow(usize, usize),

    #[error("first fundamental form is degenerate at node ({0}, {1})")]
    DegenerateNode(usize, usize),

    #[error("Weierstrass data are degenerate: {branch_nodes} of {total} nodes are branch points")]
    DegenerateData { branch_nodes: usize, total: usize },

    #[error("heat flow iterate entered the singular margin at iteration {iteration}, node ({j}, {k})")]
    SingularSetHit { iteration: usize, j: usize, k: usize },

    #[error("heat flow did not converge: residual {final_residual} after {iters} iterations")]
    NotConverged { final_residual: f64, iters: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("domain violation: {0}")]
    DomainViolation(String),

    #[error("expression error: {0}")]
    Expression(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
