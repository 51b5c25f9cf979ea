//! Shared analysis state: the program under analysis, resource budgets, and
//! memo tables for the recursive moment and bound computations.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::rc::Rc;
use std::time::{Duration, Instant};

use crate::bounds::BoundingFunctions;
use crate::error::AnalysisError;
use crate::frontend::ValidatedProgram;
use crate::moments::MomentClosedForm;
use crate::semantics::{OneStepDistribution, SignRange};
use crate::symbolic::Monomial;

/// Resource budgets and mode switches for one analysis.
#[derive(Debug, Clone)]
pub struct AnalysisSettings {
    /// Maximum number of branches a one-step distribution may expand to.
    pub branch_cap: usize,
    /// Maximum size of the monomial closure.
    pub universe_cap: usize,
    /// With relaxation (the default), drift conditions may hold only from
    /// some iteration on; without it they must hold from iteration zero.
    pub relaxation: bool,
    /// Wall-clock budget; exceeded budgets surface as `Unknown` verdicts.
    pub timeout: Option<Duration>,
}

impl Default for AnalysisSettings {
    fn default() -> AnalysisSettings {
        AnalysisSettings {
            branch_cap: 4096,
            universe_cap: 4096,
            relaxation: true,
            timeout: None,
        }
    }
}

/// Per-program analysis state. Not thread-safe by design: one context per
/// program per thread.
pub struct AnalysisContext {
    program: ValidatedProgram,
    settings: AnalysisSettings,
    started: Instant,
    pub(crate) one_step_memo: RefCell<BTreeMap<Monomial, Rc<OneStepDistribution>>>,
    pub(crate) moment_memo: RefCell<BTreeMap<Monomial, Rc<MomentClosedForm>>>,
    pub(crate) moment_stack: RefCell<BTreeSet<Monomial>>,
    pub(crate) bound_memo: RefCell<BTreeMap<Monomial, Rc<BoundingFunctions>>>,
    pub(crate) bound_stack: RefCell<BTreeSet<Monomial>>,
    pub(crate) oversign_memo: RefCell<BTreeMap<Monomial, SignRange>>,
    pub(crate) oversign_stack: RefCell<BTreeSet<Monomial>>,
}

impl AnalysisContext {
    pub fn new(program: ValidatedProgram, settings: AnalysisSettings) -> AnalysisContext {
        AnalysisContext {
            program,
            settings,
            started: Instant::now(),
            one_step_memo: RefCell::new(BTreeMap::new()),
            moment_memo: RefCell::new(BTreeMap::new()),
            moment_stack: RefCell::new(BTreeSet::new()),
            bound_memo: RefCell::new(BTreeMap::new()),
            bound_stack: RefCell::new(BTreeSet::new()),
            oversign_memo: RefCell::new(BTreeMap::new()),
            oversign_stack: RefCell::new(BTreeSet::new()),
        }
    }

    pub fn with_defaults(program: ValidatedProgram) -> AnalysisContext {
        AnalysisContext::new(program, AnalysisSettings::default())
    }

    pub fn program(&self) -> &ValidatedProgram {
        &self.program
    }

    pub fn settings(&self) -> &AnalysisSettings {
        &self.settings
    }

    /// Fails once the wall-clock budget is exhausted; called inside the
    /// recursive hot paths so runaway computations surface as `Unknown`.
    pub fn check_deadline(&self) -> Result<(), AnalysisError> {
        if let Some(budget) = self.settings.timeout {
            if self.started.elapsed() > budget {
                return Err(AnalysisError::Timeout { seconds: budget.as_secs() });
            }
        }
        Ok(())
    }
}
