//! One-step semantics of loop expressions.
//!
//! The loop body executes the variable updates in declaration order, so the
//! value of an expression after one full iteration is obtained by
//! substituting the update branches from the last variable back to the
//! first: when the last variable's update is substituted, occurrences of
//! earlier variables in it still refer to their post-update values, which the
//! remaining substitutions then resolve. The result is a finite distribution
//! over polynomials in the pre-iteration state.

use std::collections::{BTreeMap, BTreeSet};
use std::rc::Rc;

use num_traits::{One, Zero};

use crate::context::AnalysisContext;
use crate::error::AnalysisError;
use crate::symbolic::{Monomial, Polynomial, Rat, Sign};

/// The distribution of an expression's value after one loop iteration, as
/// probability-weighted polynomials in the pre-iteration variables.
/// Structurally equal branches are merged; probabilities sum to one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OneStepDistribution {
    pub branches: Vec<(Polynomial, Rat)>,
}

impl OneStepDistribution {
    /// The expected value as a polynomial in the pre-iteration state.
    pub fn expectation(&self) -> Polynomial {
        let arity = self.branches[0].0.arity();
        let mut acc = Polynomial::zero(arity);
        for (branch, prob) in &self.branches {
            acc = acc.add(&branch.scale(prob));
        }
        acc
    }
}

/// Distribution of `expr` after one loop iteration.
pub fn one_step_distribution(
    ctx: &AnalysisContext,
    expr: &Polynomial,
) -> Result<OneStepDistribution, AnalysisError> {
    ctx.check_deadline()?;
    let program = ctx.program();
    let cap = ctx.settings().branch_cap;
    let mut branches: BTreeMap<Polynomial, Rat> = BTreeMap::new();
    branches.insert(expr.clone(), Rat::one());
    for update in program.updates.iter().rev() {
        let mut next: BTreeMap<Polynomial, Rat> = BTreeMap::new();
        for (poly, prob) in &branches {
            if !poly.mentions(update.var) {
                merge(&mut next, poly.clone(), prob.clone());
            } else {
                for branch in &update.branches {
                    let substituted = poly.substitute(update.var, &branch.expr);
                    merge(&mut next, substituted, prob.clone() * branch.prob.clone());
                }
            }
            if next.len() > cap {
                return Err(AnalysisError::BranchExplosion { needed: next.len(), cap });
            }
        }
        branches = next;
    }
    Ok(OneStepDistribution { branches: branches.into_iter().collect() })
}

fn merge(map: &mut BTreeMap<Polynomial, Rat>, poly: Polynomial, prob: Rat) {
    *map.entry(poly).or_insert_with(Rat::zero) += prob;
}

/// Memoized one-step distribution of a single monomial.
pub fn one_step_monomial(
    ctx: &AnalysisContext,
    monomial: &Monomial,
) -> Result<Rc<OneStepDistribution>, AnalysisError> {
    if let Some(hit) = ctx.one_step_memo.borrow().get(monomial) {
        return Ok(hit.clone());
    }
    let expr = Polynomial::from_monomial(monomial.clone(), Rat::one());
    let dist = Rc::new(one_step_distribution(ctx, &expr)?);
    ctx.one_step_memo.borrow_mut().insert(monomial.clone(), dist.clone());
    Ok(dist)
}

/// The drift expression of `expr`: expected next value minus current value,
/// as a polynomial in the pre-iteration state.
pub fn martingale_expression(
    ctx: &AnalysisContext,
    expr: &Polynomial,
) -> Result<Polynomial, AnalysisError> {
    let dist = one_step_distribution(ctx, expr)?;
    Ok(dist.expectation().sub(expr))
}

/// Smallest set of monomials closed under one loop step that contains the
/// guard's monomials and every single variable.
pub fn monomial_universe(ctx: &AnalysisContext) -> Result<BTreeSet<Monomial>, AnalysisError> {
    let program = ctx.program();
    let arity = program.arity();
    let cap = ctx.settings().universe_cap;
    let mut universe: BTreeSet<Monomial> = BTreeSet::new();
    let mut queue: Vec<Monomial> = Vec::new();
    let enqueue = |m: Monomial, universe: &mut BTreeSet<Monomial>, queue: &mut Vec<Monomial>| {
        if !m.is_one() && universe.insert(m.clone()) {
            queue.push(m);
        }
    };
    for (m, _) in program.guard.terms() {
        enqueue(m.clone(), &mut universe, &mut queue);
    }
    for var in 0..arity {
        enqueue(Monomial::var(arity, var), &mut universe, &mut queue);
    }
    while let Some(m) = queue.pop() {
        ctx.check_deadline()?;
        if universe.len() > cap {
            return Err(AnalysisError::UniverseExplosion { cap });
        }
        let dist = one_step_monomial(ctx, &m)?;
        for (branch, _) in &dist.branches {
            for (n, _) in branch.terms() {
                enqueue(n.clone(), &mut universe, &mut queue);
            }
        }
    }
    Ok(universe)
}

/// Which signs a monomial's value can take along any program run, as a
/// syntactic over-approximation: `pos: false` proves the value is never
/// positive, `neg: false` that it is never negative.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SignRange {
    pub pos: bool,
    pub neg: bool,
}

/// Over-approximates the reachable signs of a monomial. Even powers are never
/// negative; otherwise a sign is excluded when the initial value agrees and
/// every contribution in every branch keeps the invariant: a positively
/// weighted never-negative dependency cannot push the value negative, and
/// symmetrically for the other sign.
pub fn oversign(ctx: &AnalysisContext, monomial: &Monomial) -> Result<SignRange, AnalysisError> {
    if monomial.is_one() {
        return Ok(SignRange { pos: true, neg: false });
    }
    if let Some(hit) = ctx.oversign_memo.borrow().get(monomial) {
        return Ok(*hit);
    }
    if monomial.exps().iter().all(|e| e % 2 == 0) {
        let range = SignRange { pos: true, neg: false };
        ctx.oversign_memo.borrow_mut().insert(monomial.clone(), range);
        return Ok(range);
    }
    assert!(
        ctx.oversign_stack.borrow_mut().insert(monomial.clone()),
        "oversign recursion revisited a monomial; the step order is not well founded"
    );
    let result = oversign_inner(ctx, monomial);
    ctx.oversign_stack.borrow_mut().remove(monomial);
    let range = result?;
    ctx.oversign_memo.borrow_mut().insert(monomial.clone(), range);
    Ok(range)
}

fn oversign_inner(ctx: &AnalysisContext, monomial: &Monomial) -> Result<SignRange, AnalysisError> {
    let init = monomial.eval(&ctx.program().inits);
    let dist = one_step_monomial(ctx, monomial)?;
    let mut neg_excluded = init >= Rat::zero();
    let mut pos_excluded = init <= Rat::zero();
    for (branch, _) in &dist.branches {
        for (n, c) in branch.terms() {
            if !(neg_excluded || pos_excluded) {
                break;
            }
            if n == monomial {
                // The self-contribution has a non-negative coefficient by the
                // admission checks, so it preserves either invariant.
                debug_assert!(c >= &Rat::zero());
                continue;
            }
            let n_range = oversign(ctx, n)?;
            let keeps_nonneg = match Sign::of(c) {
                Sign::Positive => !n_range.neg,
                Sign::Negative => !n_range.pos,
                Sign::Zero => true,
            };
            let keeps_nonpos = match Sign::of(c) {
                Sign::Positive => !n_range.pos,
                Sign::Negative => !n_range.neg,
                Sign::Zero => true,
            };
            neg_excluded &= keeps_nonneg;
            pos_excluded &= keeps_nonpos;
        }
    }
    Ok(SignRange { pos: !pos_excluded, neg: !neg_excluded })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::context::AnalysisContext;
    use crate::frontend::parse_program;
    use crate::symbolic::{rat, rint};

    fn ctx(src: &str) -> AnalysisContext {
        AnalysisContext::with_defaults(parse_program(src).unwrap())
    }

    /// Branch substitution runs from the last variable back to the first, so
    /// an expression in a later variable picks up the randomness of earlier
    /// updates it reads.
    #[test]
    fn one_step_distribution_of_a_square() {
        let ctx = ctx(
            "y := 1\nx := 1\nwhile x > 0:\n    y = y + 1 @1/2; y + 2\n    x = x + y @1/3; x - y\n",
        );
        let arity = 2;
        let x = Polynomial::var(arity, 1);
        let dist = one_step_distribution(&ctx, &x.pow(2)).unwrap();
        assert_eq!(dist.branches.len(), 4);
        let total: Rat = dist.branches.iter().map(|(_, p)| p.clone()).sum();
        assert_eq!(total, rint(1));
        // (x + y + 1)^2 arrives with probability 1/2 * 1/3 = 1/6.
        let y = Polynomial::var(arity, 0);
        let target = x.add(&y).add(&Polynomial::constant(arity, rint(1))).pow(2);
        let hit = dist.branches.iter().find(|(b, _)| b == &target).unwrap();
        assert_eq!(hit.1, rat(1, 6));
        // The expectation is a single polynomial combining all four branches.
        let expect = dist.expectation();
        let manual = {
            let b1 = x.add(&y).add(&Polynomial::constant(arity, rint(1))).pow(2).scale(&rat(1, 6));
            let b2 = x.add(&y).add(&Polynomial::constant(arity, rint(2))).pow(2).scale(&rat(1, 6));
            let b3 = x.sub(&y).sub(&Polynomial::constant(arity, rint(1))).pow(2).scale(&rat(1, 3));
            let b4 = x.sub(&y).sub(&Polynomial::constant(arity, rint(2))).pow(2).scale(&rat(1, 3));
            b1.add(&b2).add(&b3).add(&b4)
        };
        assert_eq!(expect, manual);
    }

    #[test]
    fn identical_branches_are_merged() {
        let ctx = ctx("x := 5\nwhile x > 0:\n    x = x - 1 @1/2; x - 1\n");
        let x = Polynomial::var(1, 0);
        let dist = one_step_distribution(&ctx, &x).unwrap();
        assert_eq!(dist.branches.len(), 1);
        assert_eq!(dist.branches[0].1, rint(1));
    }

    #[test]
    fn martingale_expression_of_symmetric_walk_is_zero() {
        let ctx = ctx("x := 10\nwhile x > 0:\n    x = x + 1 @1/2; x - 1\n");
        let x = Polynomial::var(1, 0);
        let drift = martingale_expression(&ctx, &x).unwrap();
        assert!(drift.is_zero());
    }

    #[test]
    fn universe_closes_over_guard_monomials() {
        let ctx = ctx(
            "x := 0\ny := 0\nwhile x*x + y*y < 100:\n    x = x + 1 @1/2; x - 1\n    y = y + x @1/2; y - x\n",
        );
        let universe = monomial_universe(&ctx).unwrap();
        // y^2 steps to y^2 +- 2xy + x^2, so xy must be in the closure, and
        // xy in turn needs x^2 and x.
        assert!(universe.contains(&Monomial::from_exps(vec![1, 1])));
        assert!(universe.contains(&Monomial::from_exps(vec![2, 0])));
        assert!(universe.contains(&Monomial::from_exps(vec![1, 0])));
    }

    #[test]
    fn oversign_tracks_syntactic_invariants() {
        let ctx = ctx(
            "y := 0\nx := 10\nwhile x > 0:\n    y = y + 1\n    x = x + 4*y @1/2; x - y*y\n",
        );
        let arity = 2;
        // y starts at 0 and only gains positive contributions.
        let y = Monomial::var(arity, 0);
        assert_eq!(oversign(&ctx, &y).unwrap(), SignRange { pos: true, neg: false });
        // x mixes positive and negative contributions, so both signs remain.
        let x = Monomial::var(arity, 1);
        assert_eq!(oversign(&ctx, &x).unwrap(), SignRange { pos: true, neg: true });
        // Even powers are never negative.
        let x2 = Monomial::from_exps(vec![0, 2]);
        assert_eq!(oversign(&ctx, &x2).unwrap(), SignRange { pos: true, neg: false });
    }

    #[test]
    fn oversign_excludes_positive_for_nonpositive_dynamics() {
        let ctx = ctx("x := -3\nwhile x < 0:\n    x = 2*x @1/2; 3*x\n");
        let x = Monomial::var(1, 0);
        assert_eq!(oversign(&ctx, &x).unwrap(), SignRange { pos: false, neg: true });
    }

    #[test]
    fn branch_cap_limits_expansion() {
        use crate::context::AnalysisSettings;
        let program = parse_program(
            "a := 1\nb := 1\nc := 1\nwhile a + b + c > 0:\n    a = a + 1 @1/2; a - 1\n    b = b + a @1/2; b - a\n    c = c + b @1/2; c - b\n",
        )
        .unwrap();
        let settings = AnalysisSettings { branch_cap: 3, ..AnalysisSettings::default() };
        let ctx = AnalysisContext::new(program, settings);
        let expr = Polynomial::var(3, 2);
        match one_step_distribution(&ctx, &expr) {
            Err(AnalysisError::BranchExplosion { cap: 3, .. }) => {}
            other => panic!("expected a branch explosion, got {:?}", other),
        }
    }
}
