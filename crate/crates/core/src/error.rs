use thiserror::Error;

/// Everything that can go wrong in the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parameters s and t must both be nonzero")]
    ZeroParameter,
    #[error("discriminant s^2 + 4t vanishes, so phi = phi'")]
    DegenerateDiscriminant,
    #[error("discriminant s^2 + 4t is negative; the golden pair is not real")]
    NegativeDiscriminant,
    #[error("value is not representable in the exact rational backend: {0}")]
    BackendMismatch(&'static str),
    #[error("index out of range: n = {n}, k = {k}")]
    IndexOutOfRange { n: usize, k: usize },
    #[error("q = 1 makes q-numbers undefined")]
    DegenerateQ,
    #[error("infinite q-product diverges for |q| >= 1")]
    DivergentProduct,
    #[error("operands carry different (s,t) parameters")]
    ParamsMismatch,
    #[error("series constant term is zero, cannot invert")]
    NonInvertible,
    #[error("series must vanish at zero")]
    NonzeroConstantTerm,
    #[error("divided difference is undefined at x = 0")]
    ZeroPoint,
    #[error("sum did not converge within {terms} terms")]
    ConvergenceFailure { terms: usize },
    #[error("|q| must lie strictly between 0 and 1")]
    QOutOfRange,
    #[error("|p/q| = 1 is not covered by either (p,q)-integral branch")]
    DegenerateRatio,
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(&'static str),
    #[error("resonant parameters: b*alpha - u*gamma = 0")]
    ResonantParameters,
    #[error("delay parameter u must be nonzero")]
    ZeroDelay,
    #[error("initial function is not q-periodic (defect {defect:e})")]
    NonQPeriodicInitial { defect: f64 },
    #[error("Bernoulli order must differ from 0 and 1")]
    InvalidBernoulliOrder,
    #[error("(s,t)-number {{n-1}} vanishes")]
    DegenerateStNumber,
    #[error("reconstruction node hits a zero of z")]
    ZeroDenominator,
    #[error("problem is not of the family this solver handles")]
    FamilyMismatch,
    #[error("series order {got} is too small, need at least {need}")]
    OrderTooSmall { got: usize, need: usize },
}

/// Coarse grouping used to map errors onto process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Input,
    Convergence,
    Hypothesis,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::ConvergenceFailure { .. } | Error::DivergentProduct => ErrorClass::Convergence,
            Error::HypothesisViolated(_)
            | Error::ResonantParameters
            | Error::ZeroDelay
            | Error::QOutOfRange
            | Error::DegenerateRatio
            | Error::NonQPeriodicInitial { .. }
            | Error::InvalidBernoulliOrder
            | Error::DegenerateStNumber
            | Error::ZeroDenominator => ErrorClass::Hypothesis,
            _ => ErrorClass::Input,
        }
    }
}

pub type Result<T> = core::result::Result<T, Error>;
