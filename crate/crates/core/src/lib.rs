//! Certification of termination properties for polynomial probabilistic loops.
//!
//! The crate analyzes a restricted class of probabilistic while-loops in which
//! every variable is updated by a probabilistic choice between polynomial
//! assignments. For such loops all statistical moments of program variables
//! admit closed forms in the loop iteration, which makes it possible to bound
//! martingale-style drift expressions symbolically and to certify:
//!
//! * positive almost sure termination (finite expected runtime),
//! * almost sure termination,
//! * and their negations,
//!
//! each via a dedicated proof rule over asymptotic bounding functions. Every
//! certificate carries a machine-checkable witness (the drift expression, the
//! bounding function used, and the rule-specific constants).
//!
//! The pipeline is organized bottom-up:
//!
//! * [`symbolic`]: exact rationals, monomials, polynomials, and exponential
//!   polynomials with their asymptotic growth classes,
//! * [`frontend`]: lexer, parser, and structural validation of loop programs,
//! * [`recurrence`]: closed-form solving of first-order recurrences,
//! * [`semantics`]: one-step distributions and drift expressions,
//! * [`moments`]: closed forms for expected values of monomials,
//! * [`bounds`]: asymptotic lower/upper/absolute bounding functions,
//! * [`rules`]: the four proof rules and the top-level analysis driver,
//! * [`simulator`]: an exact-arithmetic Monte Carlo sanity harness.

pub mod bounds;
pub mod context;
pub mod error;
pub mod frontend;
pub mod moments;
pub mod recurrence;
pub mod rules;
pub mod semantics;
pub mod simulator;
pub mod symbolic;

pub use context::AnalysisContext;
pub use error::{AnalysisError, FrontendError};
pub use frontend::{parse_program, ValidatedProgram};
pub use rules::{analyze, AnalysisReport, Goal, Outcome, RuleKind, Verdict, Witness};
pub use simulator::{
    check_bounds_against_stats, empirical_bound_check, simulate, BoundSide, BoundViolation,
    SimulationConfig, SimulationOutcome,
};
