//! Certification rules for termination properties of loop programs.
//!
//! Four rules are implemented, each a sufficient condition built on
//! (super)martingale reasoning about the guard value:
//!
//! * **rsm** proves positive almost-sure termination (finite expected
//!   runtime) by showing the guard value is a ranking supermartingale: its
//!   expected one-step drift, after substituting exact moments, eventually
//!   stays below a negative constant.
//! * **sm** proves almost-sure termination by showing the guard value is
//!   eventually a supermartingale while some fixed-probability branch
//!   decreases it by a bounded amount infinitely often.
//! * **r-ast** refutes almost-sure termination: the negated guard value is an
//!   eventually repulsing supermartingale with bounded step size, so once the
//!   loop is running it escapes the exit region with positive probability.
//! * **r-past** refutes positive almost-sure termination: the negated guard
//!   value is an exact martingale with bounded step size, so the expected
//!   time to reach the exit region is infinite.
//!
//! Every rule is total: analysis failures surface as `Unknown` verdicts with
//! diagnostics, never as panics or errors. [`analyze`] runs the rules in a
//! fixed order, skips rules that the eventual sign of the expected guard
//! drift already rules out, and propagates implications between certificates
//! (positive almost-sure termination implies almost-sure termination; a
//! refutation of almost-sure termination refutes its positive variant).

use std::time::{Duration, Instant};

use num_traits::Zero as _;

use crate::bounds::{absolute_bound, bound_expression, Direction, ExprBound};
use crate::context::AnalysisContext;
use crate::error::AnalysisError;
use crate::moments::{closed_form, closed_form_of_poly, expected_guard_change};
use crate::semantics::{martingale_expression, one_step_distribution, oversign};
use crate::symbolic::{
    dominating, dominating_class, eventual_sign, is_big_o_one, is_big_omega_one,
    le_neg_eps_for_all_i, limit_at_infinity, nonneg_for_all_i, nonpos_for_all_i, ExpPolynomial,
    Limit, Monomial, Polynomial, Rat, Sign,
};

/// Termination property a caller can ask to certify.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Goal {
    /// Positive almost-sure termination: finite expected runtime.
    Past,
    /// Almost-sure termination: the loop exits with probability one.
    Ast,
    /// The loop does not terminate almost surely.
    NonAst,
    /// The expected runtime is infinite.
    NonPast,
}

impl Goal {
    /// All goals in dispatch order.
    pub fn all() -> [Goal; 4] {
        [Goal::Past, Goal::Ast, Goal::NonAst, Goal::NonPast]
    }

    /// The rule that certifies this goal.
    pub fn rule(self) -> RuleKind {
        match self {
            Goal::Past => RuleKind::Rsm,
            Goal::Ast => RuleKind::Sm,
            Goal::NonAst => RuleKind::RAst,
            Goal::NonPast => RuleKind::RPast,
        }
    }

    /// Stable lowercase name used in reports.
    pub fn render(self) -> &'static str {
        match self {
            Goal::Past => "past",
            Goal::Ast => "ast",
            Goal::NonAst => "non-ast",
            Goal::NonPast => "non-past",
        }
    }

    /// Human-readable property description.
    pub fn describe(self) -> &'static str {
        match self {
            Goal::Past => "positive almost-sure termination",
            Goal::Ast => "almost-sure termination",
            Goal::NonAst => "non almost-sure termination",
            Goal::NonPast => "infinite expected runtime",
        }
    }
}

/// The proof rule behind a verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RuleKind {
    /// Ranking supermartingale rule.
    Rsm,
    /// Supermartingale rule with a decreasing branch.
    Sm,
    /// Repulsing supermartingale rule refuting almost-sure termination.
    RAst,
    /// Zero-drift repulsing rule refuting finite expected runtime.
    RPast,
}

impl RuleKind {
    /// Stable lowercase name used in reports.
    pub fn render(self) -> &'static str {
        match self {
            RuleKind::Rsm => "rsm",
            RuleKind::Sm => "sm",
            RuleKind::RAst => "r-ast",
            RuleKind::RPast => "r-past",
        }
    }
}

/// Result of one certification attempt. The rules are sound but incomplete,
/// so the only honest answers are "proved" and "not proved".
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Certified,
    Unknown,
}

/// Evidence backing a certificate, rendered as strings so reports do not
/// depend on symbolic internals. Fields are populated per rule.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Witness {
    /// Expected one-step drift of the (super)martingale, in program variables.
    pub martingale: Option<String>,
    /// Bounding function the certificate rests on, in the iteration counter.
    pub bound: Option<String>,
    /// Repulsion strength: a positive lower bound on the negated drift.
    pub epsilon: Option<String>,
    /// Update branch of the guard value that fires the decrease condition.
    pub decrease_branch: Option<String>,
    /// Probability of that branch.
    pub branch_probability: Option<String>,
    /// Eventual guaranteed decrease of that branch (1 after normalization
    /// when the decrease grows without bound).
    pub decrease: Option<String>,
    /// Constant bound on the one-step change of the supermartingale.
    pub difference_bound: Option<String>,
}

/// Outcome of one rule application for one goal.
#[derive(Debug, Clone)]
pub struct Verdict {
    pub goal: Goal,
    pub rule: RuleKind,
    pub result: Outcome,
    pub witness: Option<Witness>,
    /// True when the rule was skipped because the expected guard drift
    /// already rules it out.
    pub ruled_out: bool,
    pub diagnostics: Vec<String>,
    pub elapsed: Duration,
}

/// Full analysis result over the requested goals.
#[derive(Debug, Clone)]
pub struct AnalysisReport {
    /// Whether eventual (relaxed) side conditions were allowed.
    pub relaxed: bool,
    /// Expected guard drift as a function of the iteration counter.
    pub drift_expression: Option<String>,
    /// Eventual sign of the expected guard drift.
    pub drift_sign: Option<Sign>,
    pub verdicts: Vec<Verdict>,
}

impl AnalysisReport {
    /// The verdict for `goal`, if it was requested.
    pub fn verdict(&self, goal: Goal) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.goal == goal)
    }
}

/// How the expected guard drift constrains the applicable rules.
#[derive(Debug, Clone)]
pub struct DriftInfo {
    /// Closed form of `E[G at i+1] - E[G at i]` for the guard value `G`.
    pub expression: ExpPolynomial,
    pub valid_from: u64,
    /// Eventual sign of the drift; `None` only if the sign is ambiguous.
    pub sign: Option<Sign>,
    /// Rules that cannot fire given the drift sign.
    pub excluded: Vec<RuleKind>,
}

/// Computes the expected guard drift and the rules it rules out.
///
/// An eventually positive drift contradicts the guard value being an
/// (eventual) supermartingale, excluding the rsm and sm rules. An eventually
/// vanishing drift contradicts both a strictly negative drift (rsm) and a
/// strictly negative drift of the negated guard (r-ast). An eventually
/// negative drift dually excludes the r-ast and r-past rules.
pub fn guard_drift(ctx: &AnalysisContext) -> Result<DriftInfo, AnalysisError> {
    let (expression, valid_from) = expected_guard_change(ctx)?;
    let sign = eventual_sign(&expression);
    let excluded = match sign {
        Some(Sign::Positive) => vec![RuleKind::Rsm, RuleKind::Sm],
        Some(Sign::Zero) => vec![RuleKind::Rsm, RuleKind::RAst],
        Some(Sign::Negative) => vec![RuleKind::RAst, RuleKind::RPast],
        None => vec![],
    };
    Ok(DriftInfo { expression, valid_from, sign, excluded })
}

/// Decides whether a bound is eventually nonpositive. Without relaxation the
/// bound must be nonpositive from iteration zero on.
fn eventually_nonpos(bound: &ExprBound, relaxed: bool) -> Result<(), String> {
    if relaxed {
        match eventual_sign(&bound.collapsed) {
            Some(Sign::Negative) | Some(Sign::Zero) => Ok(()),
            Some(Sign::Positive) => Err(format!(
                "the upper bound {} is eventually positive",
                bound.collapsed.render()
            )),
            None => Err(format!(
                "the upper bound {} has no definite eventual sign",
                bound.collapsed.render()
            )),
        }
    } else if bound.valid_from > 0 {
        Err(format!("the upper bound only holds from iteration {}", bound.valid_from))
    } else if nonpos_for_all_i(&bound.collapsed) {
        Ok(())
    } else {
        Err(format!(
            "the upper bound {} is not nonpositive at every iteration",
            bound.collapsed.render()
        ))
    }
}

/// Decides whether a bound stays below some negative constant. Without
/// relaxation this must hold from iteration zero on; with relaxation an
/// eventually negative bound of at least constant magnitude suffices.
fn boundedly_negative(bound: &ExprBound, relaxed: bool) -> Result<(), String> {
    if relaxed {
        if eventual_sign(&bound.collapsed) == Some(Sign::Negative)
            && is_big_omega_one(&bound.class_fn)
        {
            Ok(())
        } else {
            Err(format!(
                "the upper bound {} does not stay below a negative constant",
                bound.collapsed.render()
            ))
        }
    } else if bound.valid_from > 0 {
        Err(format!("the upper bound only holds from iteration {}", bound.valid_from))
    } else if le_neg_eps_for_all_i(&bound.collapsed) {
        Ok(())
    } else {
        Err(format!(
            "the upper bound {} does not stay below a negative constant at every iteration",
            bound.collapsed.render()
        ))
    }
}

fn fold_error(goal: Goal, started: Instant, err: &AnalysisError) -> Verdict {
    Verdict {
        goal,
        rule: goal.rule(),
        result: Outcome::Unknown,
        witness: None,
        ruled_out: false,
        diagnostics: vec![format!("analysis gave up: {err}")],
        elapsed: started.elapsed(),
    }
}

fn unknown(goal: Goal, started: Instant, diagnostics: Vec<String>) -> Verdict {
    Verdict {
        goal,
        rule: goal.rule(),
        result: Outcome::Unknown,
        witness: None,
        ruled_out: false,
        diagnostics,
        elapsed: started.elapsed(),
    }
}

fn certified(goal: Goal, started: Instant, witness: Witness, diagnostics: Vec<String>) -> Verdict {
    Verdict {
        goal,
        rule: goal.rule(),
        result: Outcome::Certified,
        witness: Some(witness),
        ruled_out: false,
        diagnostics,
        elapsed: started.elapsed(),
    }
}

/// Attempts to certify positive almost-sure termination: the expected
/// one-step drift of the guard value, with exact moments substituted for the
/// state monomials, must eventually stay below a negative constant.
pub fn check_past(ctx: &AnalysisContext) -> Verdict {
    let started = Instant::now();
    let goal = Goal::Past;
    let program = ctx.program();
    let relaxed = ctx.settings().relaxation;

    let drift = match martingale_expression(ctx, &program.guard) {
        Ok(p) => p,
        Err(e) => return fold_error(goal, started, &e),
    };
    let (moments, valid_from) = match closed_form_of_poly(ctx, &drift) {
        Ok(pair) => pair,
        Err(e) => return fold_error(goal, started, &e),
    };
    let class = dominating_class(std::slice::from_ref(&moments));
    let class_fn = class.realize();

    let mut witness = Witness::default();
    witness.martingale = Some(drift.render(&program.var_names));
    witness.bound = Some(moments.render());

    if relaxed {
        match limit_at_infinity(&class_fn) {
            Some(limit) if limit.is_negative() => {
                let diagnostics = vec![format!(
                    "the expected guard drift {} has growth class {} with limit {}",
                    moments.render(),
                    class.render(),
                    limit.render()
                )];
                certified(goal, started, witness, diagnostics)
            }
            Some(limit) => unknown(
                goal,
                started,
                vec![format!(
                    "the expected guard drift {} tends to {}, not to a negative value",
                    moments.render(),
                    limit.render()
                )],
            ),
            None => unknown(
                goal,
                started,
                vec![format!(
                    "the limit of the expected guard drift {} is undetermined",
                    moments.render()
                )],
            ),
        }
    } else if valid_from > 0 {
        unknown(
            goal,
            started,
            vec![format!("the moment closed forms only hold from iteration {valid_from}")],
        )
    } else if le_neg_eps_for_all_i(&moments) {
        let diagnostics = vec![format!(
            "the expected guard drift {} stays below a negative constant at every iteration",
            moments.render()
        )];
        certified(goal, started, witness, diagnostics)
    } else {
        unknown(
            goal,
            started,
            vec![format!(
                "the expected guard drift {} does not stay below a negative constant at every \
                 iteration",
                moments.render()
            )],
        )
    }
}

/// Attempts to certify almost-sure termination: the guard value must be an
/// eventual supermartingale, and some fixed-probability branch must decrease
/// it by at least a constant from some iteration on.
pub fn check_ast(ctx: &AnalysisContext) -> Verdict {
    let started = Instant::now();
    let goal = Goal::Ast;
    let program = ctx.program();
    let relaxed = ctx.settings().relaxation;

    let drift = match martingale_expression(ctx, &program.guard) {
        Ok(p) => p,
        Err(e) => return fold_error(goal, started, &e),
    };
    let gate = match bound_expression(ctx, &drift, Direction::Upper) {
        Ok(b) => b,
        Err(e) => return fold_error(goal, started, &e),
    };
    if let Err(reason) = eventually_nonpos(&gate, relaxed) {
        return unknown(
            goal,
            started,
            vec![format!("the guard value is not an eventual supermartingale: {reason}")],
        );
    }

    let dist = match one_step_distribution(ctx, &program.guard) {
        Ok(d) => d,
        Err(e) => return fold_error(goal, started, &e),
    };
    let mut diagnostics = vec![format!(
        "the guard drift has upper bound {}, so the guard value is an eventual supermartingale",
        gate.collapsed.render()
    )];
    for (branch, prob) in &dist.branches {
        let diff = branch.sub(&program.guard);
        let bound = match bound_expression(ctx, &diff, Direction::Upper) {
            Ok(b) => b,
            Err(e) => {
                diagnostics.push(format!(
                    "branch {}: no usable decrease bound ({e})",
                    branch.render(&program.var_names)
                ));
                continue;
            }
        };
        let fires = if relaxed {
            limit_at_infinity(&bound.class_fn).is_some_and(|l| l.is_negative())
        } else {
            bound.valid_from == 0 && le_neg_eps_for_all_i(&bound.collapsed)
        };
        if !fires {
            diagnostics.push(format!(
                "branch {}: the change bound {} does not guarantee a decrease",
                branch.render(&program.var_names),
                bound.collapsed.render()
            ));
            continue;
        }
        let decrease = match limit_at_infinity(&bound.class_fn) {
            Some(Limit::Finite(v)) => (-v).to_string(),
            _ => "1".to_string(),
        };
        diagnostics.push(format!(
            "branch {} decreases the guard value, change bounded by {}",
            branch.render(&program.var_names),
            bound.class_fn.render()
        ));
        let witness = Witness {
            martingale: Some(drift.render(&program.var_names)),
            bound: Some(bound.class_fn.render()),
            epsilon: None,
            decrease_branch: Some(branch.render(&program.var_names)),
            branch_probability: Some(prob.to_string()),
            decrease: Some(decrease),
            difference_bound: None,
        };
        return certified(goal, started, witness, diagnostics);
    }
    diagnostics.push("no branch guarantees an eventual constant decrease".to_string());
    unknown(goal, started, diagnostics)
}

/// Shared tail of the two refutation rules: every one-step change of the
/// negated guard value must be bounded by a constant.
fn difference_bound(
    ctx: &AnalysisContext,
    neg_guard: &Polynomial,
) -> Result<ExpPolynomial, AnalysisError> {
    let dist = one_step_distribution(ctx, neg_guard)?;
    let mut bounds = Vec::with_capacity(dist.branches.len());
    for (branch, _) in &dist.branches {
        let diff = branch.sub(neg_guard);
        bounds.push(absolute_bound(ctx, &diff)?);
    }
    Ok(dominating(&bounds))
}

/// Attempts to refute almost-sure termination: the negated guard value must
/// be eventually repulsing (drift below a fixed negative constant) with
/// constant-bounded step size, while every iteration stays reachable.
pub fn check_non_ast(ctx: &AnalysisContext) -> Verdict {
    let started = Instant::now();
    let goal = Goal::NonAst;
    let program = ctx.program();
    let relaxed = ctx.settings().relaxation;

    let neg_guard = program.guard.neg();
    let drift = match martingale_expression(ctx, &neg_guard) {
        Ok(p) => p,
        Err(e) => return fold_error(goal, started, &e),
    };
    let bound = match bound_expression(ctx, &drift, Direction::Upper) {
        Ok(b) => b,
        Err(e) => return fold_error(goal, started, &e),
    };
    if let Err(reason) = boundedly_negative(&bound, relaxed) {
        return unknown(
            goal,
            started,
            vec![format!("the negated guard value is not eventually repulsing: {reason}")],
        );
    }
    let epsilon_fn = bound.class_fn.neg();

    match can_reach_any_iteration(ctx) {
        Ok(true) => {}
        Ok(false) => {
            return unknown(
                goal,
                started,
                vec![
                    "cannot establish that every iteration is reached with positive probability"
                        .to_string(),
                ],
            )
        }
        Err(e) => return fold_error(goal, started, &e),
    }

    let c = match difference_bound(ctx, &neg_guard) {
        Ok(c) => c,
        Err(e) => return fold_error(goal, started, &e),
    };
    if !is_big_o_one(&c) {
        return unknown(
            goal,
            started,
            vec![format!(
                "the one-step change of the negated guard value is not bounded by a constant \
                 (dominating bound {})",
                c.render()
            )],
        );
    }

    let diagnostics = vec![format!(
        "the negated guard value is eventually repulsing with strength {} and one-step changes \
         bounded by {}",
        epsilon_fn.render(),
        c.render()
    )];
    let witness = Witness {
        martingale: Some(drift.render(&program.var_names)),
        bound: Some(bound.collapsed.render()),
        epsilon: Some(bound.collapsed.neg().render()),
        decrease_branch: None,
        branch_probability: None,
        decrease: None,
        difference_bound: Some(c.render()),
    };
    certified(goal, started, witness, diagnostics)
}

/// Attempts to refute positive almost-sure termination: the negated guard
/// value must be an exact martingale with constant-bounded step size, while
/// every iteration stays reachable.
pub fn check_non_past(ctx: &AnalysisContext) -> Verdict {
    let started = Instant::now();
    let goal = Goal::NonPast;
    let program = ctx.program();

    let neg_guard = program.guard.neg();
    let drift = match martingale_expression(ctx, &neg_guard) {
        Ok(p) => p,
        Err(e) => return fold_error(goal, started, &e),
    };
    if !drift.is_zero() {
        return unknown(
            goal,
            started,
            vec![format!(
                "the negated guard value is not an exact martingale: its drift is {}",
                drift.render(&program.var_names)
            )],
        );
    }

    match can_reach_any_iteration(ctx) {
        Ok(true) => {}
        Ok(false) => {
            return unknown(
                goal,
                started,
                vec![
                    "cannot establish that every iteration is reached with positive probability"
                        .to_string(),
                ],
            )
        }
        Err(e) => return fold_error(goal, started, &e),
    }

    let c = match difference_bound(ctx, &neg_guard) {
        Ok(c) => c,
        Err(e) => return fold_error(goal, started, &e),
    };
    if !is_big_o_one(&c) {
        return unknown(
            goal,
            started,
            vec![format!(
                "the one-step change of the negated guard value is not bounded by a constant \
                 (dominating bound {})",
                c.render()
            )],
        );
    }

    let diagnostics = vec![format!(
        "the negated guard value is an exact martingale with one-step changes bounded by {}",
        c.render()
    )];
    let witness = Witness {
        martingale: Some(drift.render(&program.var_names)),
        bound: None,
        epsilon: None,
        decrease_branch: None,
        branch_probability: None,
        decrease: None,
        difference_bound: Some(c.render()),
    };
    certified(goal, started, witness, diagnostics)
}

/// Sound under-approximation of "every iteration is reached with positive
/// probability": the guard must hold at entry, and some fixed branch
/// combination must never decrease the guard value. Along runs that always
/// take that combination (each a positive-probability event over finitely
/// many steps) the guard then stays true forever.
pub fn can_reach_any_iteration(ctx: &AnalysisContext) -> Result<bool, AnalysisError> {
    let program = ctx.program();
    if program.guard.eval(&program.inits) <= Rat::zero() {
        return Ok(false);
    }
    let arity = program.arity();
    let mut det_var = Vec::with_capacity(arity);
    for v in 0..arity {
        det_var.push(closed_form(ctx, &Monomial::var(arity, v))?.deterministic);
    }

    let dist = one_step_distribution(ctx, &program.guard)?;
    'branches: for (branch, _) in &dist.branches {
        let diff = branch.sub(&program.guard);
        // Group the change by its random factors; deterministic factors have
        // exact per-iteration values and fold into the coefficients.
        let mut groups: std::collections::BTreeMap<Monomial, ExpPolynomial> =
            std::collections::BTreeMap::new();
        let mut sound = true;
        for (monomial, coeff) in diff.terms() {
            let (det_part, rnd_part) = monomial.split(&|v| det_var[v]);
            let form = closed_form(ctx, &det_part)?;
            if form.valid_from > 0 {
                sound = false;
                break;
            }
            let contribution = form.expr.scale(coeff);
            groups
                .entry(rnd_part)
                .and_modify(|acc| *acc = acc.add(&contribution))
                .or_insert(contribution);
        }
        if !sound {
            continue 'branches;
        }
        for (rnd, coeff_expr) in &groups {
            if !nonneg_for_all_i(coeff_expr) {
                continue 'branches;
            }
            if !rnd.is_one() && oversign(ctx, rnd)?.neg {
                continue 'branches;
            }
        }
        return Ok(true);
    }
    Ok(false)
}

fn skipped(goal: Goal, ruled_out: bool, diagnostic: String) -> Verdict {
    Verdict {
        goal,
        rule: goal.rule(),
        result: Outcome::Unknown,
        witness: None,
        ruled_out,
        diagnostics: vec![diagnostic],
        elapsed: Duration::ZERO,
    }
}

fn sign_phrase(sign: Sign) -> &'static str {
    match sign {
        Sign::Positive => "eventually positive",
        Sign::Negative => "eventually negative",
        Sign::Zero => "eventually zero",
    }
}

/// Runs the requested goals in the fixed order past, ast, non-ast, non-past.
///
/// Rules excluded by the eventual sign of the expected guard drift are
/// skipped. Certificates propagate: positive almost-sure termination implies
/// almost-sure termination, and a refutation of almost-sure termination
/// refutes the positive variant; contradicting rules are skipped once a
/// certificate exists, so no property and its negation are ever both
/// certified.
pub fn analyze(ctx: &AnalysisContext, goals: &[Goal]) -> AnalysisReport {
    let relaxed = ctx.settings().relaxation;
    let requested: Vec<Goal> =
        Goal::all().into_iter().filter(|g| goals.contains(g)).collect();

    let program = ctx.program();
    if program.guard.eval(&program.inits) <= Rat::zero() {
        let verdicts = requested
            .into_iter()
            .map(|goal| match goal {
                Goal::Past | Goal::Ast => Verdict {
                    goal,
                    rule: goal.rule(),
                    result: Outcome::Certified,
                    witness: None,
                    ruled_out: false,
                    diagnostics: vec![
                        "the guard is false at entry, so the loop performs no iterations"
                            .to_string(),
                    ],
                    elapsed: Duration::ZERO,
                },
                Goal::NonAst | Goal::NonPast => skipped(
                    goal,
                    false,
                    "the guard is false at entry, so the loop terminates immediately".to_string(),
                ),
            })
            .collect();
        return AnalysisReport {
            relaxed,
            drift_expression: None,
            drift_sign: None,
            verdicts,
        };
    }

    let (drift_expression, drift_sign, excluded, drift_diag) = match guard_drift(ctx) {
        Ok(info) => (
            Some(info.expression.render()),
            info.sign,
            info.excluded,
            None,
        ),
        Err(e) => (None, None, vec![], Some(format!("the expected guard drift is unavailable: {e}"))),
    };

    let mut verdicts: Vec<Verdict> = Vec::with_capacity(requested.len());
    for goal in requested {
        let past_certified = verdicts
            .iter()
            .any(|v| v.goal == Goal::Past && v.result == Outcome::Certified);
        let ast_certified = verdicts
            .iter()
            .any(|v| v.goal == Goal::Ast && v.result == Outcome::Certified);

        let verdict = if excluded.contains(&goal.rule()) {
            let sign = drift_sign.expect("exclusions require a drift sign");
            skipped(
                goal,
                true,
                format!(
                    "ruled out: the expected guard drift is {}, so the {} rule cannot fire",
                    sign_phrase(sign),
                    goal.rule().render()
                ),
            )
        } else if matches!(goal, Goal::NonAst | Goal::NonPast) && past_certified {
            skipped(
                goal,
                false,
                "skipped: contradicts the positive almost-sure termination certificate"
                    .to_string(),
            )
        } else if goal == Goal::NonAst && ast_certified {
            skipped(
                goal,
                false,
                "skipped: contradicts the almost-sure termination certificate".to_string(),
            )
        } else {
            let mut v = match goal {
                Goal::Past => check_past(ctx),
                Goal::Ast => check_ast(ctx),
                Goal::NonAst => check_non_ast(ctx),
                Goal::NonPast => check_non_past(ctx),
            };
            if let Some(diag) = &drift_diag {
                v.diagnostics.push(diag.clone());
            }
            v
        };
        verdicts.push(verdict);
    }

    // Implication upgrades: a positive almost-sure termination certificate
    // carries over to almost-sure termination, and a refutation of
    // almost-sure termination carries over to the positive variant.
    let past_witness = verdicts
        .iter()
        .find(|v| v.goal == Goal::Past && v.result == Outcome::Certified)
        .and_then(|v| v.witness.clone());
    if let Some(witness) = past_witness {
        if let Some(ast) = verdicts
            .iter_mut()
            .find(|v| v.goal == Goal::Ast && v.result == Outcome::Unknown)
        {
            ast.result = Outcome::Certified;
            ast.rule = RuleKind::Rsm;
            ast.witness = Some(witness);
            ast.ruled_out = false;
            ast.diagnostics
                .push("implied by the positive almost-sure termination certificate".to_string());
        }
    }
    let non_ast_witness = verdicts
        .iter()
        .find(|v| v.goal == Goal::NonAst && v.result == Outcome::Certified)
        .and_then(|v| v.witness.clone());
    if let Some(witness) = non_ast_witness {
        if let Some(non_past) = verdicts
            .iter_mut()
            .find(|v| v.goal == Goal::NonPast && v.result == Outcome::Unknown)
        {
            non_past.result = Outcome::Certified;
            non_past.rule = RuleKind::RAst;
            non_past.witness = Some(witness);
            non_past.ruled_out = false;
            non_past
                .diagnostics
                .push("implied by the refutation of almost-sure termination".to_string());
        }
    }

    AnalysisReport { relaxed, drift_expression, drift_sign, verdicts }
}
