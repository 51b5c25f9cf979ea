//! Monte Carlo execution of loop programs in exact arithmetic.
//!
//! The simulator is a sanity harness for the symbolic pipeline, not a
//! verification tool: it estimates termination behavior and per-iteration
//! statistics of arbitrary polynomial expressions so that closed-form moments
//! and bounding functions can be cross-checked against observed trajectories.
//!
//! Runs are reproducible: run `k` always draws from stream `k` of a counter
//! based generator seeded with the configured seed, so results are identical
//! across thread counts and repeated invocations. Blocks of runs execute in
//! parallel and are merged in a fixed order.
//!
//! Two interpreters produce bit-identical statistics: programs whose inputs
//! and coefficients are all integers run on checked `i128` arithmetic, and
//! everything else, including any integer run that outgrows `i128`, runs on
//! exact rationals. Both are exact, so the fast path is an implementation
//! detail, never a semantic one.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bounds::BoundingFunctions;
use crate::frontend::ValidatedProgram;
use crate::symbolic::{bit_size, Polynomial, Rat, SymValues};

/// Knobs of a simulation campaign.
#[derive(Debug, Clone)]
pub struct SimulationConfig {
    /// Number of independent runs.
    pub runs: u64,
    /// Iteration budget per run; a guarded run still alive afterwards counts
    /// as neither terminated nor diverged.
    pub max_steps: u64,
    /// Seed of the deterministic generator family.
    pub seed: u64,
    /// Last iteration index for which per-step statistics are recorded.
    pub record_horizon: u64,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig { runs: 1000, max_steps: 10_000, seed: 42, record_horizon: 64 }
    }
}

/// Statistics of one tracked expression at one iteration, over the runs
/// still recorded there.
#[derive(Debug, Clone, PartialEq)]
pub struct ExprStats {
    pub mean: f64,
    /// Population variance of the observed values.
    pub variance: f64,
    pub min: Rat,
    pub max: Rat,
}

/// Per-iteration statistics of all tracked expressions.
#[derive(Debug, Clone, PartialEq)]
pub struct StepStats {
    pub iteration: u64,
    /// Runs recorded at this iteration: in guarded mode the runs that had
    /// neither exited nor overflowed before reaching it.
    pub alive: u64,
    pub stats: Vec<ExprStats>,
}

/// Aggregate outcome of a simulation campaign.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationOutcome {
    pub runs: u64,
    /// Guarded runs whose guard became false within the budget.
    pub terminated: u64,
    /// Runs aborted because a value outgrew the representable size.
    pub diverged: u64,
    /// `terminated / runs`, exact.
    pub termination_fraction: Rat,
    /// Mean number of iterations of the terminated runs.
    pub mean_steps_terminated: Option<f64>,
    pub per_step: Vec<StepStats>,
}

/// Values larger than this many bits abort the run as diverged; it keeps
/// runaway programs from degrading into bignum crunching.
const BIT_LIMIT: u64 = 256;

/// Runs executed per parallel work item.
const BLOCK: u64 = 1024;

/// Combines one rational and one native extreme under `wins` (strictly
/// better), converting the native side only when it is consulted.
fn fold_extreme(
    rational: &Option<Rat>,
    native: &Option<i128>,
    wins: fn(&Rat, &Rat) -> bool,
) -> Option<Rat> {
    let native = native.map(|v| Rat::from(BigInt::from(v)));
    match (rational, native) {
        (Some(a), Some(b)) => Some(if wins(&b, a) { b } else { a.clone() }),
        (Some(a), None) => Some(a.clone()),
        (None, b) => b,
    }
}

struct StepAcc {
    alive: u64,
    sums: Vec<f64>,
    sumsqs: Vec<f64>,
    mins: Vec<Option<Rat>>,
    maxs: Vec<Option<Rat>>,
    /// Extremes fed by the machine-integer interpreter; kept native so the
    /// per-record hot path never allocates. Folded into the rational
    /// extremes when results are assembled.
    int_mins: Vec<Option<i128>>,
    int_maxs: Vec<Option<i128>>,
}

impl StepAcc {
    fn new(width: usize) -> StepAcc {
        StepAcc {
            alive: 0,
            sums: vec![0.0; width],
            sumsqs: vec![0.0; width],
            mins: vec![None; width],
            maxs: vec![None; width],
            int_mins: vec![None; width],
            int_maxs: vec![None; width],
        }
    }

    fn record(&mut self, values: &[Rat]) {
        self.alive += 1;
        for (k, value) in values.iter().enumerate() {
            let v = value.to_f64().unwrap_or(0.0);
            self.sums[k] += v;
            self.sumsqs[k] += v * v;
            match &mut self.mins[k] {
                Some(m) => {
                    if value < m {
                        *m = value.clone();
                    }
                }
                slot => *slot = Some(value.clone()),
            }
            match &mut self.maxs[k] {
                Some(m) => {
                    if value > m {
                        *m = value.clone();
                    }
                }
                slot => *slot = Some(value.clone()),
            }
        }
    }

    /// Same statistics as [`StepAcc::record`], fed with machine integers:
    /// float moments directly, extremes into the native lattice.
    fn record_int(&mut self, values: &[i128]) {
        self.alive += 1;
        for (k, value) in values.iter().enumerate() {
            let v = *value as f64;
            self.sums[k] += v;
            self.sumsqs[k] += v * v;
            match &mut self.int_mins[k] {
                Some(m) => *m = (*m).min(*value),
                slot => *slot = Some(*value),
            }
            match &mut self.int_maxs[k] {
                Some(m) => *m = (*m).max(*value),
                slot => *slot = Some(*value),
            }
        }
    }

    /// The smaller of the rational and native minima, as a rational.
    fn min_rat(&self, k: usize) -> Option<Rat> {
        fold_extreme(&self.mins[k], &self.int_mins[k], |a, b| a < b)
    }

    /// The larger of the rational and native maxima, as a rational.
    fn max_rat(&self, k: usize) -> Option<Rat> {
        fold_extreme(&self.maxs[k], &self.int_maxs[k], |a, b| a > b)
    }

    fn merge(&mut self, other: &StepAcc) {
        self.alive += other.alive;
        for k in 0..self.sums.len() {
            self.sums[k] += other.sums[k];
            self.sumsqs[k] += other.sumsqs[k];
            if let Some(m) = &other.int_mins[k] {
                match &mut self.int_mins[k] {
                    Some(own) => *own = (*own).min(*m),
                    slot => *slot = Some(*m),
                }
            }
            if let Some(m) = &other.int_maxs[k] {
                match &mut self.int_maxs[k] {
                    Some(own) => *own = (*own).max(*m),
                    slot => *slot = Some(*m),
                }
            }
            if let Some(m) = &other.mins[k] {
                match &mut self.mins[k] {
                    Some(own) => {
                        if m < own {
                            *own = m.clone();
                        }
                    }
                    slot => *slot = Some(m.clone()),
                }
            }
            if let Some(m) = &other.maxs[k] {
                match &mut self.maxs[k] {
                    Some(own) => {
                        if m > own {
                            *own = m.clone();
                        }
                    }
                    slot => *slot = Some(m.clone()),
                }
            }
        }
    }
}

struct BlockAcc {
    terminated: u64,
    diverged: u64,
    steps_of_terminated: u64,
    per_step: Vec<StepAcc>,
}

impl BlockAcc {
    fn new(width: usize, horizon: usize) -> BlockAcc {
        BlockAcc {
            terminated: 0,
            diverged: 0,
            steps_of_terminated: 0,
            per_step: (0..=horizon).map(|_| StepAcc::new(width)).collect(),
        }
    }

    fn merge(&mut self, other: &BlockAcc) {
        self.terminated += other.terminated;
        self.diverged += other.diverged;
        self.steps_of_terminated += other.steps_of_terminated;
        for (own, theirs) in self.per_step.iter_mut().zip(&other.per_step) {
            own.merge(theirs);
        }
    }
}

/// Draws a branch index according to the exact branch probabilities, using a
/// uniform draw on the dyadic grid of size 2^64 (bias below 2^-64 per draw).
fn pick_branch(rng: &mut ChaCha8Rng, probs: &[Rat]) -> usize {
    let draw = Rat::new(BigInt::from(rng.next_u64()), BigInt::one() << 64u32);
    let mut cumulative = Rat::zero();
    for (idx, p) in probs.iter().enumerate() {
        cumulative += p.clone();
        if draw < cumulative {
            return idx;
        }
    }
    probs.len() - 1
}

fn state_overflows(state: &[Rat]) -> bool {
    state.iter().any(|v| bit_size(v) > BIT_LIMIT)
}

/// A polynomial compiled to machine-integer arithmetic. Evaluation is exact
/// whenever every intermediate fits an `i128`; an overflow surfaces as `None`
/// and sends the whole run back to the rational interpreter.
struct IntPoly {
    terms: Vec<(Vec<(usize, u32)>, i128)>,
}

impl IntPoly {
    fn compile(poly: &Polynomial) -> Option<IntPoly> {
        let mut terms = Vec::with_capacity(poly.num_terms());
        for (monomial, coeff) in poly.terms() {
            if !coeff.is_integer() {
                return None;
            }
            let coeff = coeff.numer().to_i128()?;
            let vars: Vec<(usize, u32)> = monomial
                .exps()
                .iter()
                .enumerate()
                .filter(|(_, e)| **e > 0)
                .map(|(v, e)| (v, *e))
                .collect();
            terms.push((vars, coeff));
        }
        Some(IntPoly { terms })
    }

    fn eval(&self, state: &[i128]) -> Option<i128> {
        let mut acc: i128 = 0;
        for (vars, coeff) in &self.terms {
            let mut term = *coeff;
            for (var, exp) in vars {
                term = term.checked_mul(state[*var].checked_pow(*exp)?)?;
            }
            acc = acc.checked_add(term)?;
        }
        Some(acc)
    }
}

struct IntUpdate {
    var: usize,
    branches: Vec<IntPoly>,
    /// Cumulative branch probabilities scaled onto the 2^64 dyadic grid:
    /// the draw `d = next_u64()` picks the first branch with `d < t[k]`.
    /// The thresholds are `ceil(cum_k * 2^64)`, which reproduces the
    /// comparison `d / 2^64 < cum_k` of [`pick_branch`] on every integer
    /// draw, so both interpreters consume and interpret the generator
    /// identically.
    thresholds: Vec<u128>,
}

/// A loop program and its tracked expressions compiled to checked `i128`
/// arithmetic. Only programs whose initial values and coefficients are all
/// integers compile; everything else stays on the rational interpreter.
struct IntCompiled {
    inits: Vec<i128>,
    guard: IntPoly,
    updates: Vec<IntUpdate>,
    exprs: Vec<IntPoly>,
}

impl IntCompiled {
    fn compile(program: &ValidatedProgram, exprs: &[Polynomial]) -> Option<IntCompiled> {
        let inits = program
            .inits
            .iter()
            .map(|v| if v.is_integer() { v.numer().to_i128() } else { None })
            .collect::<Option<Vec<i128>>>()?;
        let guard = IntPoly::compile(&program.guard)?;
        let mut updates = Vec::with_capacity(program.updates.len());
        for update in &program.updates {
            let branches = update
                .branches
                .iter()
                .map(|b| IntPoly::compile(&b.expr))
                .collect::<Option<Vec<IntPoly>>>()?;
            let grid = BigInt::one() << 64u32;
            let mut cumulative = Rat::zero();
            let mut thresholds = Vec::with_capacity(update.branches.len());
            for branch in &update.branches {
                cumulative += branch.prob.clone();
                let scaled = (cumulative.numer() * &grid + cumulative.denom() - BigInt::one())
                    / cumulative.denom();
                thresholds.push(scaled.to_u128()?);
            }
            updates.push(IntUpdate { var: update.var, branches, thresholds });
        }
        let exprs = exprs.iter().map(IntPoly::compile).collect::<Option<Vec<IntPoly>>>()?;
        Some(IntCompiled { inits, guard, updates, exprs })
    }
}

/// Scratch space of the integer interpreter, reused across runs so the hot
/// loop performs no allocation.
struct IntScratch {
    state: Vec<i128>,
    record_steps: Vec<u64>,
    record_values: Vec<i128>,
}

impl IntScratch {
    fn new() -> IntScratch {
        IntScratch { state: Vec::new(), record_steps: Vec::new(), record_values: Vec::new() }
    }
}

/// Runs one execution on the integer interpreter. Records are buffered and
/// flushed only on completion, so an overflow leaves the accumulator
/// untouched and the run can be replayed exactly on the rational
/// interpreter (the replay reseeds the generator, so partial consumption
/// here does not matter). Integer runs never trip the divergence cap:
/// every representable value is far below `2^BIT_LIMIT`.
fn simulate_run_int(
    ip: &IntCompiled,
    config: &SimulationConfig,
    guarded: bool,
    rng: &mut ChaCha8Rng,
    acc: &mut BlockAcc,
    scratch: &mut IntScratch,
) -> Option<()> {
    let horizon = config.record_horizon.min(config.max_steps);
    scratch.state.clear();
    scratch.state.extend_from_slice(&ip.inits);
    scratch.record_steps.clear();
    scratch.record_values.clear();
    let mut steps: u64 = 0;
    let mut terminated = false;

    macro_rules! record {
        () => {
            if steps <= horizon {
                for expr in &ip.exprs {
                    scratch.record_values.push(expr.eval(&scratch.state)?);
                }
                scratch.record_steps.push(steps);
            }
        };
    }
    record!();

    loop {
        if guarded && ip.guard.eval(&scratch.state)? <= 0 {
            terminated = true;
            break;
        }
        if steps == config.max_steps {
            break;
        }
        for update in &ip.updates {
            let idx = if update.branches.len() == 1 {
                0
            } else {
                let draw = rng.next_u64() as u128;
                update
                    .thresholds
                    .iter()
                    .position(|t| draw < *t)
                    .unwrap_or(update.branches.len() - 1)
            };
            scratch.state[update.var] = update.branches[idx].eval(&scratch.state)?;
        }
        steps += 1;
        record!();
    }

    if terminated {
        acc.terminated += 1;
        acc.steps_of_terminated += steps;
    }
    let width = ip.exprs.len();
    for (k, step) in scratch.record_steps.iter().enumerate() {
        acc.per_step[*step as usize]
            .record_int(&scratch.record_values[k * width..(k + 1) * width]);
    }
    Some(())
}

/// Simulates `config.runs` executions of `program`, tracking the expressions
/// in `exprs` for the first `record_horizon` iterations.
///
/// With `guarded` set, a run stops as soon as the guard fails, matching real
/// execution; without it the body executes unconditionally, which realizes
/// the stochastic process whose moments the symbolic pipeline computes.
pub fn simulate(
    program: &ValidatedProgram,
    config: &SimulationConfig,
    exprs: &[Polynomial],
    guarded: bool,
) -> SimulationOutcome {
    let horizon = config.record_horizon.min(config.max_steps) as usize;
    let width = exprs.len();

    let blocks: Vec<(u64, u64)> = (0..config.runs)
        .step_by(BLOCK.max(1) as usize)
        .map(|start| (start, (start + BLOCK).min(config.runs)))
        .collect();

    // Integer-only programs run on a checked machine-integer interpreter
    // with identical draws and exactly equal results; a run that outgrows
    // i128 replays on the rational interpreter from its own seed stream.
    let compiled = IntCompiled::compile(program, exprs);

    let partials: Vec<BlockAcc> = blocks
        .par_iter()
        .map(|&(start, end)| {
            let mut acc = BlockAcc::new(width, horizon);
            let mut scratch = IntScratch::new();
            for run in start..end {
                if let Some(ip) = &compiled {
                    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
                    rng.set_stream(run);
                    if simulate_run_int(ip, config, guarded, &mut rng, &mut acc, &mut scratch)
                        .is_some()
                    {
                        continue;
                    }
                }
                let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
                rng.set_stream(run);
                simulate_run(program, config, exprs, guarded, &mut rng, &mut acc);
            }
            acc
        })
        .collect();

    let mut total = BlockAcc::new(width, horizon);
    for partial in &partials {
        total.merge(partial);
    }

    let per_step = total
        .per_step
        .into_iter()
        .enumerate()
        .map(|(iteration, acc)| {
            let n = acc.alive.max(1) as f64;
            let stats = (0..width)
                .map(|k| {
                    let mean = acc.sums[k] / n;
                    let variance = (acc.sumsqs[k] / n - mean * mean).max(0.0);
                    ExprStats {
                        mean,
                        variance,
                        min: acc.min_rat(k).unwrap_or_else(Rat::zero),
                        max: acc.max_rat(k).unwrap_or_else(Rat::zero),
                    }
                })
                .collect();
            StepStats { iteration: iteration as u64, alive: acc.alive, stats }
        })
        .collect();

    SimulationOutcome {
        runs: config.runs,
        terminated: total.terminated,
        diverged: total.diverged,
        termination_fraction: Rat::new(BigInt::from(total.terminated), BigInt::from(config.runs.max(1))),
        mean_steps_terminated: if total.terminated > 0 {
            Some(total.steps_of_terminated as f64 / total.terminated as f64)
        } else {
            None
        },
        per_step,
    }
}

fn simulate_run(
    program: &ValidatedProgram,
    config: &SimulationConfig,
    exprs: &[Polynomial],
    guarded: bool,
    rng: &mut ChaCha8Rng,
    acc: &mut BlockAcc,
) {
    let horizon = config.record_horizon.min(config.max_steps);
    let mut state: Vec<Rat> = program.inits.clone();
    let mut steps: u64 = 0;

    let record = |acc: &mut BlockAcc, step: u64, state: &[Rat]| {
        if step <= horizon {
            let values: Vec<Rat> = exprs.iter().map(|e| e.eval(state)).collect();
            acc.per_step[step as usize].record(&values);
        }
    };
    record(acc, 0, &state);

    loop {
        if guarded && program.guard.eval(&state) <= Rat::zero() {
            acc.terminated += 1;
            acc.steps_of_terminated += steps;
            return;
        }
        if steps == config.max_steps {
            return;
        }
        for update in &program.updates {
            let idx = if update.branches.len() == 1 {
                0
            } else {
                let probs: Vec<Rat> =
                    update.branches.iter().map(|b| b.prob.clone()).collect();
                pick_branch(rng, &probs)
            };
            state[update.var] = update.branches[idx].expr.eval(&state);
        }
        steps += 1;
        if state_overflows(&state) {
            acc.diverged += 1;
            return;
        }
        record(acc, steps, &state);
    }
}

/// Which side of a bounding-function pair a violation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundSide {
    Lower,
    Upper,
}

/// One iteration at which a sampled extreme escaped the fitted envelope.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundViolation {
    pub side: BoundSide,
    pub iteration: u64,
    /// The sampled extreme among the runs surviving this iteration.
    pub observed: Rat,
    /// The envelope value, scale constant already folded in.
    pub allowed: Rat,
}

impl BoundViolation {
    pub fn render(&self) -> String {
        match self.side {
            BoundSide::Lower => format!(
                "iteration {}: sampled minimum {} fell below the fitted lower envelope {}",
                self.iteration, self.observed, self.allowed
            ),
            BoundSide::Upper => format!(
                "iteration {}: sampled maximum {} exceeded the fitted upper envelope {}",
                self.iteration, self.observed, self.allowed
            ),
        }
    }
}

/// Iterations with fewer surviving runs are not judged: the extremes of a
/// handful of trajectories say nothing about an asymptotic envelope.
const MIN_SUPPORT: u64 = 50;

/// Cross-checks the bounding functions of one monomial against simulation.
///
/// The body executes unconditionally, because bounding functions envelope the
/// value recurrences of the unguarded process; runs survive until they hit
/// the size cap. Bounding functions hold up to positive constants, so the
/// check first fits scale factors `alpha` and `beta` at the first iteration
/// of `i_range` with enough surviving runs, then demands
/// `alpha * lower(i) <= sampled min <= sampled max <= beta * upper(i)` at
/// every supported iteration of the range. The fitted factors leave slack
/// (double the observed ratio), so genuine envelopes pass while bounds of a
/// wrong growth class accumulate violations within a few iterations.
pub fn empirical_bound_check(
    program: &ValidatedProgram,
    bounds: &BoundingFunctions,
    config: &SimulationConfig,
    i_range: (u64, u64),
) -> Vec<BoundViolation> {
    let (_, end) = i_range;
    let expr = Polynomial::from_monomial(bounds.monomial.clone(), Rat::one());
    let sim_config = SimulationConfig {
        runs: config.runs,
        max_steps: end,
        seed: config.seed,
        record_horizon: end,
    };
    let outcome = simulate(program, &sim_config, &[expr], false);
    check_bounds_against_stats(bounds, &outcome, 0, i_range)
}

/// The fit-and-sweep half of [`empirical_bound_check`], reusable across the
/// tracked expressions of one shared simulation: `outcome` must stem from an
/// unguarded run recording through the end of `i_range`, with the monomial
/// of `bounds` tracked at position `expr_index`.
pub fn check_bounds_against_stats(
    bounds: &BoundingFunctions,
    outcome: &SimulationOutcome,
    expr_index: usize,
    i_range: (u64, u64),
) -> Vec<BoundViolation> {
    let (start, end) = i_range;
    let syms = SymValues::default();

    let supported: Vec<(u64, Rat, Rat)> = outcome
        .per_step
        .iter()
        .filter(|s| s.iteration >= start && s.iteration <= end && s.alive >= MIN_SUPPORT)
        .map(|s| {
            (s.iteration, s.stats[expr_index].min.clone(), s.stats[expr_index].max.clone())
        })
        .collect();

    let mut violations = Vec::new();
    let Some((i0, min0, max0)) = supported.first().cloned() else {
        return violations;
    };

    let two = Rat::from(BigInt::from(2));

    // A positive upper envelope absorbs any observed maximum by scaling up;
    // a negative one can only be relaxed toward zero, so it must already
    // have the observed sign. Impossible fits fall back to scale one and
    // surface as violations in the sweep below.
    let u0 = bounds.upper.eval(i0, &syms);
    let beta = if u0.is_positive() {
        let excess = (max0.clone() / u0.clone()).max(Rat::zero());
        two.clone() * (Rat::one() + excess)
    } else if u0.is_negative() && max0.is_negative() {
        (max0.clone() / u0.clone()) / two.clone()
    } else {
        Rat::one()
    };

    let l0 = bounds.lower.eval(i0, &syms);
    let alpha = if l0.is_negative() {
        let excess = (min0.clone() / l0.clone()).max(Rat::zero());
        two.clone() * (Rat::one() + excess)
    } else if l0.is_positive() && min0.is_positive() {
        (min0.clone() / l0.clone()) / two
    } else {
        Rat::one()
    };

    for (i, min_i, max_i) in &supported {
        let allowed_low = bounds.lower.eval(*i, &syms) * alpha.clone();
        if *min_i < allowed_low {
            violations.push(BoundViolation {
                side: BoundSide::Lower,
                iteration: *i,
                observed: min_i.clone(),
                allowed: allowed_low,
            });
        }
        let allowed_up = bounds.upper.eval(*i, &syms) * beta.clone();
        if *max_i > allowed_up {
            violations.push(BoundViolation {
                side: BoundSide::Upper,
                iteration: *i,
                observed: max_i.clone(),
                allowed: allowed_up,
            });
        }
    }
    violations
}
