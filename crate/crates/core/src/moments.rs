//! Closed forms for expected values of monomials.
//!
//! Under the admitted update shape, the expectation of a monomial `M` obeys
//! `E[M_(i+1)] = r * E[M_i] + h(i)` where `r` is the probability-weighted
//! coefficient of `M` in its own one-step branches and `h` collects the
//! closed forms of strictly smaller monomials. The monomial order makes the
//! recursion well founded, so closed forms are computed bottom-up and
//! memoized.

use std::collections::{BTreeMap, BTreeSet};
use std::rc::Rc;

use num_traits::{One, Zero};

use crate::context::AnalysisContext;
use crate::error::AnalysisError;
use crate::recurrence;
use crate::semantics::one_step_monomial;
use crate::symbolic::{ExpPolynomial, Monomial, Polynomial, Rat, SymLin};

/// The expectation of a monomial as a function of the iteration.
#[derive(Debug, Clone)]
pub struct MomentClosedForm {
    pub monomial: Monomial,
    /// Equals `E[monomial at iteration i]` for every `i >= valid_from`.
    pub expr: ExpPolynomial,
    /// Almost always 0; positive only for chains of memoryless updates
    /// whose one-point impulses are not expressible.
    pub valid_from: u64,
    /// True when the monomial's value is the same on every run, in which
    /// case `expr` is the exact trajectory, not just the mean.
    pub deterministic: bool,
}

/// Closed form of `E[monomial]`, memoized in the context.
pub fn closed_form(
    ctx: &AnalysisContext,
    monomial: &Monomial,
) -> Result<Rc<MomentClosedForm>, AnalysisError> {
    if let Some(hit) = ctx.moment_memo.borrow().get(monomial) {
        return Ok(hit.clone());
    }
    ctx.check_deadline()?;
    if monomial.is_one() {
        let form = Rc::new(MomentClosedForm {
            monomial: monomial.clone(),
            expr: ExpPolynomial::constant(Rat::one()),
            valid_from: 0,
            deterministic: true,
        });
        ctx.moment_memo.borrow_mut().insert(monomial.clone(), form.clone());
        return Ok(form);
    }
    assert!(
        ctx.moment_stack.borrow_mut().insert(monomial.clone()),
        "moment recursion revisited a monomial; the step order is not well founded"
    );
    let result = closed_form_inner(ctx, monomial);
    ctx.moment_stack.borrow_mut().remove(monomial);
    let form = Rc::new(result?);
    ctx.moment_memo.borrow_mut().insert(monomial.clone(), form.clone());
    Ok(form)
}

fn closed_form_inner(
    ctx: &AnalysisContext,
    monomial: &Monomial,
) -> Result<MomentClosedForm, AnalysisError> {
    let dist = one_step_monomial(ctx, monomial)?;

    // Split the expected one-step polynomial into the self-coefficient and
    // the strictly smaller remainder.
    let mut recurrence_coeff = Rat::zero();
    let mut dependency_weights: BTreeMap<Monomial, Rat> = BTreeMap::new();
    for (branch, prob) in &dist.branches {
        for (n, c) in branch.terms() {
            let weighted = prob.clone() * c.clone();
            if n == monomial {
                recurrence_coeff += weighted;
            } else {
                debug_assert!(n < monomial, "one-step branches only reach smaller monomials");
                *dependency_weights.entry(n.clone()).or_insert_with(Rat::zero) += weighted;
            }
        }
    }
    assert!(
        recurrence_coeff >= Rat::zero(),
        "self-coefficients are products of admitted non-negative factors"
    );

    let mut h = ExpPolynomial::zero();
    let mut h_valid_from = 0u64;
    let mut deterministic = dist.branches.len() == 1;
    for (n, weight) in &dependency_weights {
        if weight.is_zero() {
            continue;
        }
        let dep = closed_form(ctx, n)?;
        h = h.add(&dep.expr.scale(weight));
        h_valid_from = h_valid_from.max(dep.valid_from);
        deterministic &= dep.deterministic;
    }

    let initial = monomial.eval(&ctx.program().inits);
    let solution = if h_valid_from == 0 {
        recurrence::solve(&recurrence_coeff, &h, &SymLin::from_rat(initial))
    } else {
        // Defensive: dependency monomials always keep positive self-
        // coefficients (a variable only survives substitution through its
        // own scaled update), so their closed forms are exact from 0 and
        // this branch is not expected to run. If it ever does, anchor the
        // recurrence at the first trusted iteration with an exact value.
        let table = iterate_moments(ctx, std::slice::from_ref(monomial), h_valid_from)?;
        let anchor_value = table[h_valid_from as usize][monomial].clone();
        recurrence::solve_anchored(
            &recurrence_coeff,
            &h,
            h_valid_from,
            &SymLin::from_rat(anchor_value),
        )
    };
    Ok(MomentClosedForm {
        monomial: monomial.clone(),
        expr: solution.expr,
        valid_from: solution.valid_from,
        deterministic,
    })
}

/// Closed form of the expectation of a polynomial expression, with the
/// iteration from which it is exact.
pub fn closed_form_of_poly(
    ctx: &AnalysisContext,
    poly: &Polynomial,
) -> Result<(ExpPolynomial, u64), AnalysisError> {
    let mut acc = ExpPolynomial::zero();
    let mut valid_from = 0u64;
    for (m, c) in poly.terms() {
        let form = closed_form(ctx, m)?;
        acc = acc.add(&form.expr.scale(c));
        valid_from = valid_from.max(form.valid_from);
    }
    Ok((acc, valid_from))
}

/// Closed form of `E[G at iteration i+1] - E[G at iteration i]` for the loop
/// guard `G`: the expected guard drift.
pub fn expected_guard_change(
    ctx: &AnalysisContext,
) -> Result<(ExpPolynomial, u64), AnalysisError> {
    let (g, valid_from) = closed_form_of_poly(ctx, &ctx.program().guard)?;
    Ok((g.shift_forward().sub(&g), valid_from))
}

/// Exact expected values of `targets` for iterations `0..=steps`, computed by
/// forward iteration of the moment recursion over the monomial closure. This
/// is independent of the closed-form solver and doubles as its test oracle.
pub fn iterate_moments(
    ctx: &AnalysisContext,
    targets: &[Monomial],
    steps: u64,
) -> Result<Vec<BTreeMap<Monomial, Rat>>, AnalysisError> {
    let cap = ctx.settings().universe_cap;
    let mut closure: BTreeSet<Monomial> = BTreeSet::new();
    let mut queue: Vec<Monomial> = Vec::new();
    for t in targets {
        if !t.is_one() && closure.insert(t.clone()) {
            queue.push(t.clone());
        }
    }
    while let Some(m) = queue.pop() {
        ctx.check_deadline()?;
        if closure.len() > cap {
            return Err(AnalysisError::UniverseExplosion { cap });
        }
        let dist = one_step_monomial(ctx, &m)?;
        for (branch, _) in &dist.branches {
            for (n, _) in branch.terms() {
                if !n.is_one() && closure.insert(n.clone()) {
                    queue.push(n.clone());
                }
            }
        }
    }

    let inits = &ctx.program().inits;
    let one = Monomial::one(ctx.program().arity());
    let mut current: BTreeMap<Monomial, Rat> =
        closure.iter().map(|m| (m.clone(), m.eval(inits))).collect();
    current.insert(one.clone(), Rat::one());
    let mut table = vec![current.clone()];
    for _ in 0..steps {
        ctx.check_deadline()?;
        let mut next: BTreeMap<Monomial, Rat> = BTreeMap::new();
        for m in &closure {
            let dist = one_step_monomial(ctx, m)?;
            let mut acc = Rat::zero();
            for (branch, prob) in &dist.branches {
                for (n, c) in branch.terms() {
                    acc += prob.clone() * c.clone() * current[n].clone();
                }
            }
            next.insert(m.clone(), acc);
        }
        next.insert(one.clone(), Rat::one());
        table.push(next.clone());
        current = next;
    }
    Ok(table)
}
