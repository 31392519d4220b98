use thiserror::Error;

use crate::scalars::DvrSpec;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid DVR specification: {0}")]
    InvalidDvr(String),
    #[error("mismatched base rings: {0:?} vs {1:?}")]
    SpecMismatch(DvrSpec, DvrSpec),
    #[error("element of valuation {0} is not a unit")]
    NotAUnit(u32),
    #[error("element is not divisible by t")]
    NotDivisibleByT,
    #[error("coefficient denominator is divisible by the target characteristic {0}")]
    DenominatorCollision(u64),
    #[error("specialization not defined: {0}")]
    BadSpecialization(String),
    #[error("invalid field: {0}")]
    InvalidField(String),
    #[error("total degree {degree} exceeds the cap {cap}")]
    DegreeCapExceeded { degree: u32, cap: u32 },
    #[error("variable count mismatch: expected {expected}, got {got}")]
    VariableMismatch { expected: usize, got: usize },
    #[error("variable index {0} out of range")]
    BadVariable(usize),
    #[error("substitution is not t-adically convergent: {0}")]
    NonConvergentSubstitution(String),
    #[error("invalid fraction {n}/{q}")]
    InvalidFraction { n: u64, q: u64 },
    #[error("chain {0:?} is not reduced")]
    NonReducedChain(Vec<u32>),
    #[error("lattice point ({0}, {1}) is outside the cone")]
    NotInCone(i64, i64),
    #[error("lattice point ({0}, {1}) is not representable by two consecutive generators")]
    NotRepresentable(i64, i64),
    #[error("integer overflow in lattice arithmetic")]
    LatticeOverflow,
    #[error("rewriting did not terminate within {0} steps")]
    RewriteDiverged(usize),
    #[error("generator set is missing g'({0},{1})")]
    MissingGenerator(usize, usize),
    #[error("generator g'({0},{1}) does not reduce to its template modulo t")]
    NotALift(usize, usize),
    #[error("shifting made no progress: residual t-degree {before} -> {after} on pass {pass}")]
    NoProgress { pass: usize, before: u32, after: u32 },
    #[error("point does not lie on the fiber: {0}")]
    PointNotOnFiber(String),
    #[error("point does not lie on the variety")]
    PointNotOnVariety,
    #[error("specialization is degenerate: {0}")]
    DegenerateSpecialization(String),
    #[error("enumeration budget of {0} candidates exceeded")]
    BudgetExceeded(u64),
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("invalid job document: {0}")]
    Job(String),
}

impl Error {
    pub(crate) fn parse(pos: usize, msg: impl Into<String>) -> Self {
        Error::Parse { pos, msg: msg.into() }
    }
}
