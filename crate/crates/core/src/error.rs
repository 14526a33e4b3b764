use num_bigint::BigUint;

/// Errors raised anywhere in the pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("inversion of zero")]
    ZeroInverse,
    #[error("division by the zero polynomial")]
    ZeroDivisor,
    #[error("constant polynomial cannot be factored")]
    ConstantPoly,
    #[error("polynomial search exhausted after {0} candidate pairs")]
    SearchExhausted(u64),
    #[error("moduli are not pairwise coprime")]
    NonCoprimeModuli,
    #[error("target is not in the subgroup generated by the base")]
    NotInSubgroup,
    #[error("rank deficiency modulo {modulus}: {pivots} pivots, {required} required")]
    RankDeficient {
        modulus: BigUint,
        pivots: usize,
        required: usize,
    },
    #[error("obstruction: {0}")]
    Obstruction(String),
    #[error("heuristic failure: {0}")]
    Heuristic(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("size bound exceeded: {0}")]
    SizeBound(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

impl Error {
    /// True for failures that signal a heuristic or structural obstruction
    /// rather than a bad input.
    pub fn is_heuristic_failure(&self) -> bool {
        matches!(
            self,
            Error::RankDeficient { .. }
                | Error::Obstruction(_)
                | Error::Heuristic(_)
                | Error::SearchExhausted(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
