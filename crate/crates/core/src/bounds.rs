//! Per-run asymptotic bounding functions.
//!
//! For every monomial `M` over program variables this module computes
//! exponential-polynomial functions `l`, `u`, and `a` such that on every run,
//! for suitable positive constants and from some iteration on,
//! `c2 * l(i) <= M_i <= c1 * u(i)` and `|M_i| <= c * a(i)`. Deterministic
//! monomials get their exact trajectory instead. The construction follows the
//! value recurrence of `M`: per-step self-coefficients range over the branch
//! coefficients, the inhomogeneous remainder is bounded by the dominating
//! envelope of the bounds of strictly smaller monomials (scaled by the
//! symbolic positive constant `d`), and candidate solutions for each extreme
//! self-coefficient and admissible initial sign are enveloped again.
//!
//! `bound_expression` lifts the per-monomial bounds to arbitrary polynomial
//! expressions by substituting deterministic factors exactly and replacing
//! random factors by the bound matching the sign of their coefficient.

use std::collections::BTreeMap;
use std::rc::Rc;

use num_traits::Zero;

use crate::context::AnalysisContext;
use crate::error::AnalysisError;
use crate::moments::closed_form;
use crate::recurrence;
use crate::semantics::{one_step_monomial, oversign};
use crate::symbolic::{
    dominated, dominated_class, dominating, dominating_class, eventual_sign, nonneg_for_all_i,
    nonpos_for_all_i, ExpPolynomial, GrowthClass, Monomial, Polynomial, Rat, Sign, Sym, SymLin,
};

/// Which side of a value an expression bound must cover.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Upper,
    Lower,
}

/// Asymptotic bounding functions of one monomial's per-run value.
#[derive(Debug, Clone)]
pub struct BoundingFunctions {
    pub monomial: Monomial,
    /// Eventual lower bound up to a positive constant; exact when `exact`.
    pub lower: ExpPolynomial,
    /// Eventual upper bound up to a positive constant; exact when `exact`.
    pub upper: ExpPolynomial,
    /// Eventual bound of the absolute value up to a positive constant.
    pub absolute: ExpPolynomial,
    /// True when lower and upper are the exact deterministic trajectory.
    pub exact: bool,
    pub valid_from: u64,
    /// The enveloped candidate solutions, kept for reporting.
    pub upper_candidates: Vec<ExpPolynomial>,
    pub lower_candidates: Vec<ExpPolynomial>,
}

/// Bounding functions for a monomial, memoized in the context.
pub fn bounding_functions(
    ctx: &AnalysisContext,
    monomial: &Monomial,
) -> Result<Rc<BoundingFunctions>, AnalysisError> {
    if let Some(hit) = ctx.bound_memo.borrow().get(monomial) {
        return Ok(hit.clone());
    }
    ctx.check_deadline()?;
    assert!(
        ctx.bound_stack.borrow_mut().insert(monomial.clone()),
        "bound recursion revisited a monomial; the step order is not well founded"
    );
    let result = bounding_functions_inner(ctx, monomial);
    ctx.bound_stack.borrow_mut().remove(monomial);
    let bounds = Rc::new(result?);
    ctx.bound_memo.borrow_mut().insert(monomial.clone(), bounds.clone());
    Ok(bounds)
}

fn exact_bounds(monomial: &Monomial, expr: ExpPolynomial, valid_from: u64) -> BoundingFunctions {
    let absolute = dominating(&[expr.clone(), expr.neg()]);
    BoundingFunctions {
        monomial: monomial.clone(),
        lower: expr.clone(),
        upper: expr.clone(),
        absolute,
        exact: true,
        valid_from,
        upper_candidates: vec![expr.clone()],
        lower_candidates: vec![expr],
    }
}

fn bounding_functions_inner(
    ctx: &AnalysisContext,
    monomial: &Monomial,
) -> Result<BoundingFunctions, AnalysisError> {
    let form = closed_form(ctx, monomial)?;
    if form.deterministic {
        return Ok(exact_bounds(monomial, form.expr.clone(), form.valid_from));
    }

    let range = oversign(ctx, monomial)?;
    if !range.pos && !range.neg {
        // The value can be neither positive nor negative: it is always zero.
        return Ok(exact_bounds(monomial, ExpPolynomial::zero(), 0));
    }

    // An odd power is monotone, so bounds of the root can simply be powered.
    // This is often much tighter than bounding the power's own recurrence.
    let exp_gcd = monomial.exps().iter().copied().filter(|e| *e > 0).fold(0u32, gcd);
    let odd_part = odd_factor(exp_gcd);
    if odd_part > 1 {
        let root =
            Monomial::from_exps(monomial.exps().iter().map(|e| e / odd_part).collect());
        let inner = bounding_functions(ctx, &root)?;
        let upper = inner.upper.pow(odd_part);
        let lower = inner.lower.pow(odd_part);
        let absolute = dominating(&[upper.clone(), lower.neg()]);
        return Ok(BoundingFunctions {
            monomial: monomial.clone(),
            lower: lower.clone(),
            upper: upper.clone(),
            absolute,
            exact: inner.exact,
            valid_from: inner.valid_from,
            upper_candidates: vec![upper],
            lower_candidates: vec![lower],
        });
    }

    // Per-run value recurrence: each step multiplies the monomial by one of
    // the branch self-coefficients and adds that branch's remainder.
    let dist = one_step_monomial(ctx, monomial)?;
    let mut self_coeffs: Vec<Rat> = Vec::new();
    let mut upper_parts: Vec<ExpPolynomial> = Vec::new();
    let mut lower_parts: Vec<ExpPolynomial> = Vec::new();
    let mut valid_from = form.valid_from;
    for (branch, _) in &dist.branches {
        let a = branch.coeff(monomial);
        if !self_coeffs.contains(&a) {
            self_coeffs.push(a.clone());
        }
        let mut has_remainder = false;
        for (n, c) in branch.terms() {
            if n == monomial {
                continue;
            }
            has_remainder = true;
            let dep = bounding_functions(ctx, n)?;
            valid_from = valid_from.max(dep.valid_from);
            let (up, low) = if c > &Rat::zero() {
                (dep.upper.scale(c), dep.lower.scale(c))
            } else {
                (dep.lower.scale(c), dep.upper.scale(c))
            };
            upper_parts.push(up);
            lower_parts.push(low);
        }
        if !has_remainder {
            // A purely homogeneous branch contributes an exactly zero
            // remainder, which pins the envelope on that side.
            upper_parts.push(ExpPolynomial::zero());
            lower_parts.push(ExpPolynomial::zero());
        }
    }
    let rec_min = self_coeffs.iter().min().expect("at least one branch").clone();
    let rec_max = self_coeffs.iter().max().expect("at least one branch").clone();
    let mut recs = vec![rec_min, rec_max];
    recs.dedup();

    let inhom_upper = dominating(&upper_parts).scale_symlin(&SymLin::sym(Sym::D));
    let inhom_lower = dominated(&lower_parts).scale_symlin(&SymLin::sym(Sym::D));

    let mut initials: Vec<SymLin> = Vec::new();
    if range.pos {
        initials.push(SymLin::sym(Sym::C1));
    }
    if range.neg {
        initials.push(SymLin::sym(Sym::C2).neg());
    }

    let mut upper_candidates = Vec::new();
    let mut lower_candidates = Vec::new();
    for r in &recs {
        for init in &initials {
            let up = recurrence::solve(r, &inhom_upper, init);
            valid_from = valid_from.max(up.valid_from);
            upper_candidates.push(up.expr);
            let low = recurrence::solve(r, &inhom_lower, init);
            valid_from = valid_from.max(low.valid_from);
            lower_candidates.push(low.expr);
        }
    }

    let upper = dominating(&upper_candidates);
    let lower = dominated(&lower_candidates);
    let absolute = dominating(&[upper.clone(), lower.neg()]);
    Ok(BoundingFunctions {
        monomial: monomial.clone(),
        lower,
        upper,
        absolute,
        exact: false,
        valid_from,
        upper_candidates,
        lower_candidates,
    })
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn odd_factor(mut n: u32) -> u32 {
    while n > 0 && n % 2 == 0 {
        n /= 2;
    }
    n
}

/// A one-sided bound of a polynomial expression's per-run value.
#[derive(Debug, Clone)]
pub struct ExprBound {
    /// Bound with symbolic constants: exact parts are plain, substituted
    /// class bounds carry the positive constant `d`.
    pub collapsed: ExpPolynomial,
    /// Asymptotic growth class of the collapsed bound.
    pub class: GrowthClass,
    /// The class realized as a concrete function.
    pub class_fn: ExpPolynomial,
    pub valid_from: u64,
}

/// Bounds the per-run value of `expr` from the requested side.
///
/// Deterministic variable factors are substituted exactly; each random factor
/// is replaced by its upper or lower bounding function according to the sign
/// of its (iteration-dependent) coefficient. In relaxed mode the eventual
/// sign decides; without relaxation the sign must hold for every iteration or
/// the expression is rejected as ambiguous.
pub fn bound_expression(
    ctx: &AnalysisContext,
    expr: &Polynomial,
    direction: Direction,
) -> Result<ExprBound, AnalysisError> {
    let arity = ctx.program().arity();
    let mut det_var = Vec::with_capacity(arity);
    for v in 0..arity {
        det_var.push(closed_form(ctx, &Monomial::var(arity, v))?.deterministic);
    }

    let relaxed = ctx.settings().relaxation;
    let mut exact_acc = ExpPolynomial::zero();
    let mut pieces: Vec<ExpPolynomial> = Vec::new();
    let mut valid_from = 0u64;
    for (n, c) in expr.terms() {
        let (det_part, rnd_part) = n.split(&|v| det_var[v]);
        let det_form = closed_form(ctx, &det_part)?;
        debug_assert!(det_form.deterministic);
        let coeff_expr = det_form.expr.scale(c);
        valid_from = valid_from.max(det_form.valid_from);
        if rnd_part.is_one() {
            exact_acc = exact_acc.add(&coeff_expr);
            continue;
        }
        let bounds = bounding_functions(ctx, &rnd_part)?;
        valid_from = valid_from.max(bounds.valid_from);
        if bounds.exact {
            // Exact trajectories substitute directly, whatever their sign.
            exact_acc = exact_acc.add(&coeff_expr.mul(&bounds.upper));
            continue;
        }
        if coeff_expr.leading().is_none() {
            // The coefficient is zero from iteration 1 on; the term only
            // contributes its initial value, which is known exactly.
            let spike = coeff_expr.eval_symlin(0).scale(&rnd_part.eval(&ctx.program().inits));
            exact_acc = exact_acc.add(&ExpPolynomial::term(Rat::zero(), 0, spike));
            continue;
        }
        let coeff_sign = if relaxed {
            eventual_sign(&coeff_expr).expect("plain coefficients have a definite eventual sign")
        } else if nonneg_for_all_i(&coeff_expr) {
            Sign::Positive
        } else if nonpos_for_all_i(&coeff_expr) {
            Sign::Negative
        } else {
            return Err(AnalysisError::AmbiguousSign { expression: coeff_expr.render() });
        };
        let bound = match (coeff_sign, direction) {
            (Sign::Positive, Direction::Upper) | (Sign::Negative, Direction::Lower) => {
                &bounds.upper
            }
            (Sign::Positive, Direction::Lower) | (Sign::Negative, Direction::Upper) => {
                &bounds.lower
            }
            (Sign::Zero, _) => unreachable!("zero coefficients have no leading term"),
        };
        pieces.push(coeff_expr.mul(bound));
    }

    let collapsed = exact_acc.add(&collapse_pieces(&pieces, direction));
    let class = match direction {
        Direction::Upper => dominating_class(std::slice::from_ref(&collapsed)),
        Direction::Lower => dominated_class(std::slice::from_ref(&collapsed)),
    };
    Ok(ExprBound { collapsed: collapsed.clone(), class: class.clone(), class_fn: class.realize(), valid_from })
}

/// Sums substituted bound pieces under one shared constant `d`.
///
/// Each piece is only known up to its own positive constant, so the sum under
/// a single `d` is sound only if no two pieces push the same term in opposite
/// directions. When they do, the sum is replaced by the pieces' envelope,
/// which absorbs per-piece constants by construction.
fn collapse_pieces(pieces: &[ExpPolynomial], direction: Direction) -> ExpPolynomial {
    let mut sum = ExpPolynomial::zero();
    let mut term_signs: BTreeMap<(Rat, u32), Sign> = BTreeMap::new();
    let mut collision = false;
    for piece in pieces {
        for (base, deg, coeff) in piece.iter_terms() {
            let sign = coeff
                .sign_class()
                .expect("substituted bound pieces are plain before scaling by d");
            if sign == Sign::Zero {
                continue;
            }
            match term_signs.entry((base.clone(), deg)) {
                std::collections::btree_map::Entry::Vacant(slot) => {
                    slot.insert(sign);
                }
                std::collections::btree_map::Entry::Occupied(slot) => {
                    if *slot.get() != sign {
                        collision = true;
                    }
                }
            }
        }
        sum = sum.add(piece);
    }
    let merged = if collision {
        match direction {
            Direction::Upper => dominating(pieces),
            Direction::Lower => dominated(pieces),
        }
    } else {
        sum
    };
    merged.scale_symlin(&SymLin::sym(Sym::D))
}

/// An eventual bound of `|expr|` up to a positive constant, as the dominating
/// envelope of the expression's two one-sided bound classes.
pub fn absolute_bound(
    ctx: &AnalysisContext,
    expr: &Polynomial,
) -> Result<ExpPolynomial, AnalysisError> {
    let upper = bound_expression(ctx, expr, Direction::Upper)?;
    let lower = bound_expression(ctx, expr, Direction::Lower)?;
    Ok(dominating(&[upper.class_fn, lower.class_fn.neg()]))
}
