use thiserror::Error;

use crate::scalars::Value;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("zero polynomial not allowed here")]
    ZeroPolynomial,
    #[error("element has value {0}, expected a unit")]
    NonUnitValue(Value),
    #[error("divisor is not monic of positive degree")]
    NonMonicDivisor,
    #[error("residual polynomial is not irreducible")]
    NotIrreducible,
    #[error("no residual factor lifts to a polynomial of larger value (oracle is not a valuation?)")]
    NoVanishingFactor,
    #[error("series precision exhausted at frontier {frontier}")]
    PrecisionExhausted { frontier: Value },
    #[error("value of x is {0}, must be positive")]
    NonPositiveValueOfX(Value),
    #[error("budget exhausted: {0}")]
    BudgetExhausted(String),
    #[error("factorization over this residue field needs degree {degree} > bound {bound}")]
    UnsupportedResidueField { degree: usize, bound: usize },
    #[error("numerical character has not stabilized over the window")]
    NotStabilized,
    #[error("gap condition unmet at level {level}")]
    GapConditionUnmet { level: usize },
    #[error("no probe stays defective over the trace window")]
    NoDefectiveProbe,
    #[error("value {0} is not in the value group")]
    NotInGroup(Value),
    #[error("value is infinite")]
    InfiniteValue,
    #[error("invalid chain: {0}")]
    InvalidChain(String),
    #[error("invalid oracle: {0}")]
    InvalidOracle(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("level {0} does not exist")]
    NoSuchLevel(usize),
    #[error("json: {0}")]
    Json(String),
}

impl Error {
    /// Precision and budget failures, as opposed to domain errors.
    pub fn is_resource(&self) -> bool {
        matches!(self, Error::PrecisionExhausted { .. } | Error::BudgetExhausted(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
