//! Exact symbolic toolkit for the motivic McKay correspondence.
//!
//! The pipeline, bottom to top:
//! - [`cyclotomic`]: exact arithmetic in Q(xi_d) and exact linear algebra
//!   over it (kernel dimensions, determinants, inverses).
//! - [`motivic_ring`]: the measure-value ring Z[L^(1/D), L^(-1/D)] extended
//!   by the generators (L-1)/(L^i-1), with the filtration norm and the
//!   Hodge / Euler / point-count realizations.
//! - [`finite_group`]: finite matrix groups from generators; conjugacy
//!   classes, centralizers, eigenvalue exponents, weights.
//! - [`mckay`]: the group-side measure sums, per-class measures, and arc
//!   classification for the cyclic family.
//! - [`resolution`]: declarative resolution data, the resolution-side
//!   measure formula, and the built-in ADE / cyclic-chain / Z3 catalog.
//! - [`jet_oracle`]: brute-force jet counting over small prime fields, the
//!   independent cross-check for the symbolic predictions.
//!
//! Everything is exact: arbitrary-precision rationals throughout, no
//! floating point.

pub mod cyclotomic;
pub mod finite_group;
pub mod jet_oracle;
pub mod mckay;
pub mod motivic_ring;
pub mod resolution;

pub use cyclotomic::{CycMatrix, CycNum};
pub use motivic_ring::{HodgeExpr, MotivicExpr, MotivicTerm, Norm};

/// Exact rational scalar used across the crate.
pub type Rational = num::BigRational;

/// Errors across the toolkit.  The CLI maps these onto its exit-code
/// contract: budget/convergence failures are distinct from input errors.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,
    #[error("group too large or infinite (closure cap {0})")]
    GroupTooLarge(usize),
    #[error("element is not a member of the group")]
    NotInGroup,
    #[error("generator is not invertible")]
    SingularGenerator,
    #[error("dimension mismatch: resolution has dim {0}, group acts in dimension {1}")]
    DimensionMismatch(u32, usize),
    #[error("group is not inside SL_n: the resolution-side identity needs determinant 1")]
    NotSpecialLinear,
    #[error("resolution not crepant")]
    NotCrepant,
    #[error("unknown catalog identifier `{0}`")]
    UnknownCatalog(String),
    #[error("non-integral exponent")]
    NonIntegralExponent,
    #[error("budget exceeded: required at least {required} tuples, cap {cap}")]
    BudgetExceeded { required: u128, cap: u128 },
    #[error("no-convergence: lift counts did not stabilize by m = {cap_m} (last count {last})")]
    NoConvergence { cap_m: u32, last: u64 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    /// Construct an input error from anything printable.
    pub fn input(msg: impl std::fmt::Display) -> Self {
        Error::InvalidInput(msg.to_string())
    }

    /// True for resource-limit failures (budget caps, non-convergence),
    /// as opposed to malformed input.
    pub fn is_budget(&self) -> bool {
        matches!(
            self,
            Error::BudgetExceeded { .. } | Error::NoConvergence { .. } | Error::GroupTooLarge(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
