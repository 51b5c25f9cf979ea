//! Closed forms for first-order recurrences `y(i+1) = r*y(i) + h(i)` with a
//! constant non-negative coefficient `r` and an exponential-polynomial
//! inhomogeneous part `h`.
//!
//! Each term `p(i) * b^i` of `h` contributes a particular solution by the
//! method of undetermined coefficients: a polynomial multiple of `b^i` when
//! `b != r`, a degree-raised one in the resonant case `b == r`, and a pair of
//! compensating `r^i` / `0^i` terms when `b == 0` (an impulse only hits the
//! value one step later). The homogeneous remainder anchors the solution at
//! the initial value, so the closed form is exact for every `i >= 0`, with
//! one documented exception: a coefficient `r == 0` erases history, and if
//! `h` itself carries an impulse the value at `i == 1` cannot be written as
//! an exponential polynomial. The solver then drops that single point and
//! reports it via `valid_from`.

use num_traits::{One, Zero};

use crate::symbolic::{rat_pow, ExpPolynomial, Rat, SymLin};

/// A solved recurrence: `expr(i)` equals the true sequence for every
/// `i >= valid_from` (almost always 0).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solution {
    pub expr: ExpPolynomial,
    pub valid_from: u64,
}

/// Solves `y(i+1) = r*y(i) + h(i)` with `y(0) = y0`.
pub fn solve(r: &Rat, h: &ExpPolynomial, y0: &SymLin) -> Solution {
    assert!(r >= &Rat::zero(), "recurrence coefficients are non-negative by admission");
    if r.is_zero() {
        return solve_memoryless(h, y0);
    }

    let mut expr = ExpPolynomial::zero();
    // Homogeneous coefficient, adjusted below so that expr(0) = y0.
    let mut hom = y0.clone();
    for (base, poly) in group_by_base(h) {
        if base.is_zero() {
            // An impulse k*0^i enters the value at i = 1 and is then scaled
            // by r each step: it contributes (k/r)*r^i - (k/r)*0^i, which is
            // zero at i = 0 as required.
            let k = poly[0].clone();
            let scaled = k.scale(&(Rat::one() / r.clone()));
            expr.add_term(r.clone(), 0, scaled.clone());
            expr.add_term(Rat::zero(), 0, scaled.neg());
        } else if &base == r {
            // Resonance: q(i)*r^i with q(i+1) - q(i) = p(i)/r and q(0) = 0.
            let target: Vec<SymLin> =
                poly.iter().map(|c| c.scale(&(Rat::one() / r.clone()))).collect();
            let q = discrete_antidifference(&target);
            for (deg, coeff) in q.iter().enumerate() {
                expr.add_term(base.clone(), deg as u32, coeff.clone());
            }
        } else {
            // q(i)*b^i with b*q(i+1) - r*q(i) = p(i), solvable degree by
            // degree because b != r.
            let q = solve_undetermined(&base, r, &poly);
            for (deg, coeff) in q.iter().enumerate() {
                expr.add_term(base.clone(), deg as u32, coeff.clone());
            }
            hom = hom.sub(&q[0]);
        }
    }
    expr.add_term(r.clone(), 0, hom);
    Solution { expr, valid_from: 0 }
}

/// `r == 0`: the value is just the previous inhomogeneous input, plus an
/// impulse restoring the initial value.
fn solve_memoryless(h: &ExpPolynomial, y0: &SymLin) -> Solution {
    let (mut expr, lost_impulse) = shift_index(h, -1);
    let at_zero = expr.eval_symlin(0);
    expr.add_term(Rat::zero(), 0, y0.sub(&at_zero));
    // If h itself had an impulse, the true value at i = 1 is not expressible
    // and the closed form starts being exact one step later.
    Solution { expr, valid_from: if lost_impulse { 2 } else { 0 } }
}

/// Solves the recurrence given the exact value at `anchor` instead of at 0;
/// used when the inhomogeneous part is only trusted from `anchor` on.
pub fn solve_anchored(r: &Rat, h: &ExpPolynomial, anchor: u64, value: &SymLin) -> Solution {
    if anchor == 0 {
        return solve(r, h, value);
    }
    let (shifted, _) = shift_index(h, anchor as i64);
    let local = solve(r, &shifted, value);
    // Re-index from j = i - anchor back to i. A 0^j impulse would sit exactly
    // at the anchor; dropping it costs that single point.
    let mut expr = ExpPolynomial::zero();
    let mut dropped_impulse = false;
    for (base, deg, coeff) in local.expr.iter_terms() {
        if base.is_zero() {
            dropped_impulse = true;
            continue;
        }
        let rebased = coeff.scale(&(Rat::one() / rat_pow(base, anchor as u32)));
        add_shifted_power(&mut expr, base, deg, &rebased, -(anchor as i64));
    }
    let valid_from = if local.valid_from > 0 {
        anchor + local.valid_from
    } else if dropped_impulse {
        anchor + 1
    } else {
        anchor
    };
    Solution { expr, valid_from }
}

/// Residual `s(i+1) - r*s(i) - h(i)`; identically zero for a correct closed
/// form (used by the verification tests).
pub fn residual(r: &Rat, h: &ExpPolynomial, s: &ExpPolynomial) -> ExpPolynomial {
    s.shift_forward().sub(&s.scale(r)).sub(h)
}

/// Groups the terms of an exponential polynomial into dense per-base
/// coefficient vectors.
fn group_by_base(f: &ExpPolynomial) -> Vec<(Rat, Vec<SymLin>)> {
    let mut acc: Vec<(Rat, Vec<SymLin>)> = Vec::new();
    for (base, deg, coeff) in f.iter_terms() {
        match acc.iter_mut().find(|(b, _)| b == base) {
            Some((_, poly)) => {
                if poly.len() <= deg as usize {
                    poly.resize(deg as usize + 1, SymLin::zero());
                }
                poly[deg as usize] = coeff.clone();
            }
            None => {
                let mut poly = vec![SymLin::zero(); deg as usize + 1];
                poly[deg as usize] = coeff.clone();
                acc.push((base.clone(), poly));
            }
        }
    }
    acc
}

/// Finds `q` with `b*q(i+1) - r*q(i) = p(i)`, degree by degree from the top;
/// the division is by `b - r != 0`.
fn solve_undetermined(b: &Rat, r: &Rat, p: &[SymLin]) -> Vec<SymLin> {
    let degree = p.len() - 1;
    let mut q = vec![SymLin::zero(); degree + 1];
    let gap = b.clone() - r.clone();
    debug_assert!(!gap.is_zero());
    for k in (0..=degree).rev() {
        // Coefficient of i^k in b*q(i+1) - r*q(i) is
        // (b - r)*q_k + sum_{j > k} b * C(j, k) * q_j.
        let mut known = SymLin::zero();
        for j in (k + 1)..=degree {
            let weight = b.clone() * Rat::from_integer(binomial(j as u32, k as u32).into());
            known = known.add(&q[j].scale(&weight));
        }
        q[k] = p[k].sub(&known).scale(&(Rat::one() / gap.clone()));
    }
    q
}

/// Finds the polynomial `q` of degree `deg(p) + 1` with
/// `q(i+1) - q(i) = p(i)` and `q(0) = 0` (the discrete antiderivative).
fn discrete_antidifference(p: &[SymLin]) -> Vec<SymLin> {
    let degree = p.len() - 1;
    let mut q = vec![SymLin::zero(); degree + 2];
    // Coefficient of i^k in q(i+1) - q(i) is sum_{j > k} C(j, k) * q_j;
    // solving from k = degree down determines q_{degree+1} .. q_1.
    for k in (0..=degree).rev() {
        let mut known = SymLin::zero();
        for j in (k + 2)..=(degree + 1) {
            let weight = Rat::from_integer(binomial(j as u32, k as u32).into());
            known = known.add(&q[j].scale(&weight));
        }
        let lead_weight = Rat::from_integer(binomial(k as u32 + 1, k as u32).into());
        q[k + 1] = p[k].sub(&known).scale(&(Rat::one() / lead_weight));
    }
    q
}

/// Adds `coeff * (i + delta)^deg * base^i` to `acc`, expanding the shifted
/// power binomially.
fn add_shifted_power(acc: &mut ExpPolynomial, base: &Rat, deg: u32, coeff: &SymLin, delta: i64) {
    let delta = Rat::from_integer(delta.into());
    for k in 0..=deg {
        let weight = Rat::from_integer(binomial(deg, k).into()) * rat_pow(&delta, deg - k);
        acc.add_term(base.clone(), k, coeff.scale(&weight));
    }
}

/// The function `i -> f(i + delta)` as an exponential polynomial. Impulse
/// (base-zero) terms move off the non-negative domain for `delta > 0`, which
/// is exact; for `delta < 0` they would move inside it at `i = -delta`,
/// which is not representable, so they are dropped and reported.
fn shift_index(f: &ExpPolynomial, delta: i64) -> (ExpPolynomial, bool) {
    let mut out = ExpPolynomial::zero();
    let mut lost_impulse = false;
    for (base, deg, coeff) in f.iter_terms() {
        if base.is_zero() {
            if delta == 0 {
                out.add_term(base.clone(), deg, coeff.clone());
            } else if delta < 0 {
                lost_impulse = true;
            }
            continue;
        }
        let factor = if delta >= 0 {
            rat_pow(base, delta as u32)
        } else {
            Rat::one() / rat_pow(base, (-delta) as u32)
        };
        add_shifted_power(&mut out, base, deg, &coeff.scale(&factor), delta);
    }
    (out, lost_impulse)
}

/// Binomial coefficient over u64; the degrees involved are tiny.
fn binomial(n: u32, k: u32) -> u64 {
    let k = k.min(n - k.min(n));
    let mut acc: u64 = 1;
    for j in 0..k {
        acc = acc * (n - j) as u64 / (j + 1) as u64;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::{rat, rint, Sym, SymValues};

    fn plain(v: i64) -> SymLin {
        SymLin::from_rat(rint(v))
    }

    /// Iterates the recurrence directly and compares against the closed form.
    fn check_against_iteration(r: &Rat, h: &ExpPolynomial, y0: &SymLin, steps: u64) {
        let solution = solve(r, h, y0);
        let syms = SymValues { c1: rat(7, 3), c2: rat(2, 5), d: rat(11, 4) };
        let mut value = y0.eval(&syms);
        for i in 0..=steps {
            if i >= solution.valid_from {
                assert_eq!(
                    solution.expr.eval(i, &syms),
                    value,
                    "closed form diverges at i = {} (r = {}, h = {})",
                    i,
                    r,
                    h.render()
                );
            }
            value = r.clone() * value + h.eval(i, &syms);
        }
        // The residual identity holds exactly, impulses included.
        assert!(residual(r, h, &solution.expr).is_zero());
    }

    #[test]
    fn solves_the_distinct_base_case() {
        // y(i+1) = 2y(i) + d*i^2, y(0) = c1.
        let h = ExpPolynomial::term(rint(1), 2, SymLin::sym(Sym::D));
        let solution = solve(&rint(2), &h, &SymLin::sym(Sym::C1));
        assert_eq!(solution.valid_from, 0);
        assert_eq!(solution.expr.render(), "(c1 + 3*d)*2^i - d*i^2 - 2*d*i - 3*d");
        check_against_iteration(&rint(2), &h, &SymLin::sym(Sym::C1), 12);
    }

    #[test]
    fn solves_the_contracting_case() {
        // y(i+1) = y(i)/2 + d*i^2, y(0) = c1.
        let h = ExpPolynomial::term(rint(1), 2, SymLin::sym(Sym::D));
        let solution = solve(&rat(1, 2), &h, &SymLin::sym(Sym::C1));
        assert_eq!(
            solution.expr.render(),
            "2*d*i^2 - 8*d*i + 12*d + (c1 - 12*d)*(1/2)^i"
        );
        check_against_iteration(&rat(1, 2), &h, &SymLin::sym(Sym::C1), 12);
    }

    #[test]
    fn solves_resonance_by_raising_the_degree() {
        // y(i+1) = 3y(i) + (i + 1)*3^i.
        let mut h = ExpPolynomial::term(rint(3), 1, plain(1));
        h.add_term(rint(3), 0, plain(1));
        check_against_iteration(&rint(3), &h, &plain(2), 10);
        // Plain summation: y(i+1) = y(i) + i has the closed form with q(0)=0.
        let h2 = ExpPolynomial::term(rint(1), 1, plain(1));
        check_against_iteration(&rint(1), &h2, &plain(0), 10);
    }

    #[test]
    fn impulse_inputs_stay_exact_when_r_is_positive() {
        // y(i+1) = 2y(i) + 5*0^i: the impulse lands at i = 1 and doubles on.
        let h = ExpPolynomial::term(rint(0), 0, plain(5));
        check_against_iteration(&rint(2), &h, &plain(1), 10);
    }

    #[test]
    fn memoryless_recurrences_reproduce_shifted_input() {
        // y(i+1) = 0*y(i) + (i^2 + 1): y(0) = 9, y(i) = (i-1)^2 + 1 after.
        let mut h = ExpPolynomial::term(rint(1), 2, plain(1));
        h.add_term(rint(1), 0, plain(1));
        check_against_iteration(&rint(0), &h, &plain(9), 10);
    }

    #[test]
    fn memoryless_with_impulse_loses_exactly_one_point() {
        // y(i+1) = 0*y(i) + 4*0^i + 1: y(1) = 5 is a lone spike.
        let mut h = ExpPolynomial::term(rint(0), 0, plain(4));
        h.add_term(rint(1), 0, plain(1));
        let solution = solve(&rint(0), &h, &plain(7));
        assert_eq!(solution.valid_from, 2);
        let syms = SymValues::default();
        assert_eq!(solution.expr.eval(0, &syms), rint(7));
        assert_eq!(solution.expr.eval(2, &syms), rint(1));
        assert_eq!(solution.expr.eval(5, &syms), rint(1));
    }

    #[test]
    fn anchored_solutions_agree_from_the_anchor_on() {
        // Anchor the contracting case at i = 3 with its true value there.
        let h = ExpPolynomial::term(rint(1), 1, plain(6));
        let full = solve(&rat(1, 3), &h, &plain(5));
        let syms = SymValues::default();
        let anchor_value = full.expr.eval(3, &syms);
        let anchored =
            solve_anchored(&rat(1, 3), &h, 3, &SymLin::from_rat(anchor_value));
        assert!(anchored.valid_from <= 3);
        for i in 3..12u64 {
            assert_eq!(anchored.expr.eval(i, &syms), full.expr.eval(i, &syms));
        }
    }
}
