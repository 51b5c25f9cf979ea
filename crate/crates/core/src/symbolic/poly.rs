//! Multivariate monomials and polynomials over the program variables.
//!
//! Monomials are ordered by comparing exponent tuples lexicographically from
//! the last declared variable down to the first. Under the program's update
//! discipline (each variable may depend polynomially only on variables
//! declared before it) this order is compatible with one loop step: every
//! monomial appearing in the expected update of `M` is less than or equal to
//! `M`, which is what makes the moment computation well founded.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};

use super::rat::{rat_pow, Rat};

/// A power product of program variables, stored as one exponent per variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial {
    exps: Vec<u32>,
}

impl Monomial {
    /// The empty product (the constant monomial 1).
    pub fn one(arity: usize) -> Monomial {
        Monomial { exps: vec![0; arity] }
    }

    /// The single variable `x_index`.
    pub fn var(arity: usize, index: usize) -> Monomial {
        let mut exps = vec![0; arity];
        exps[index] = 1;
        Monomial { exps }
    }

    /// Builds a monomial from an explicit exponent vector.
    pub fn from_exps(exps: Vec<u32>) -> Monomial {
        Monomial { exps }
    }

    pub fn arity(&self) -> usize {
        self.exps.len()
    }

    pub fn exps(&self) -> &[u32] {
        &self.exps
    }

    pub fn exp(&self, var: usize) -> u32 {
        self.exps[var]
    }

    /// Total degree (sum of exponents).
    pub fn degree(&self) -> u32 {
        self.exps.iter().sum()
    }

    pub fn is_one(&self) -> bool {
        self.exps.iter().all(|&e| e == 0)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        debug_assert_eq!(self.arity(), other.arity());
        let exps = self.exps.iter().zip(&other.exps).map(|(a, b)| a + b).collect();
        Monomial { exps }
    }

    pub fn pow(&self, exp: u32) -> Monomial {
        let exps = self.exps.iter().map(|e| e * exp).collect();
        Monomial { exps }
    }

    /// Splits off the exponents of the variables selected by `keep`,
    /// returning `(selected, rest)` with `self = selected * rest`.
    pub fn split(&self, keep: &dyn Fn(usize) -> bool) -> (Monomial, Monomial) {
        let mut sel = vec![0; self.exps.len()];
        let mut rest = vec![0; self.exps.len()];
        for (var, &e) in self.exps.iter().enumerate() {
            if keep(var) {
                sel[var] = e;
            } else {
                rest[var] = e;
            }
        }
        (Monomial { exps: sel }, Monomial { exps: rest })
    }

    /// Evaluates the monomial at a variable assignment.
    pub fn eval(&self, state: &[Rat]) -> Rat {
        let mut acc = Rat::one();
        for (var, &e) in self.exps.iter().enumerate() {
            if e > 0 {
                acc *= rat_pow(&state[var], e);
            }
        }
        acc
    }

    /// Renders the monomial using the given variable names, e.g. `x^2*y`.
    pub fn render(&self, names: &[String]) -> String {
        let mut parts = Vec::new();
        for (var, &e) in self.exps.iter().enumerate() {
            match e {
                0 => {}
                1 => parts.push(names[var].clone()),
                _ => parts.push(format!("{}^{}", names[var], e)),
            }
        }
        if parts.is_empty() {
            "1".to_string()
        } else {
            parts.join("*")
        }
    }
}

impl Ord for Monomial {
    /// Compares exponent tuples lexicographically from the last variable to
    /// the first, so monomials in later variables always dominate.
    fn cmp(&self, other: &Monomial) -> Ordering {
        debug_assert_eq!(self.arity(), other.arity());
        for (a, b) in self.exps.iter().rev().zip(other.exps.iter().rev()) {
            match a.cmp(b) {
                Ordering::Equal => {}
                non_eq => return non_eq,
            }
        }
        Ordering::Equal
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Monomial) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A polynomial over the program variables with exact rational coefficients.
/// Zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Polynomial {
    arity: usize,
    terms: BTreeMap<Monomial, Rat>,
}

impl Polynomial {
    pub fn zero(arity: usize) -> Polynomial {
        Polynomial { arity, terms: BTreeMap::new() }
    }

    pub fn constant(arity: usize, value: Rat) -> Polynomial {
        let mut p = Polynomial::zero(arity);
        p.add_term(Monomial::one(arity), value);
        p
    }

    pub fn var(arity: usize, index: usize) -> Polynomial {
        let mut p = Polynomial::zero(arity);
        p.add_term(Monomial::var(arity, index), Rat::one());
        p
    }

    pub fn from_monomial(monomial: Monomial, coeff: Rat) -> Polynomial {
        let mut p = Polynomial::zero(monomial.arity());
        p.add_term(monomial, coeff);
        p
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Returns the constant value if the polynomial has no variable terms.
    pub fn as_constant(&self) -> Option<Rat> {
        if self.terms.is_empty() {
            return Some(Rat::zero());
        }
        if self.terms.len() == 1 {
            let (m, c) = self.terms.iter().next().unwrap();
            if m.is_one() {
                return Some(c.clone());
            }
        }
        None
    }

    /// Coefficient of `monomial` (zero if absent).
    pub fn coeff(&self, monomial: &Monomial) -> Rat {
        self.terms.get(monomial).cloned().unwrap_or_else(Rat::zero)
    }

    /// Iterates terms in increasing monomial order.
    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rat)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Adds `coeff * monomial`, removing the term if it cancels.
    pub fn add_term(&mut self, monomial: Monomial, coeff: Rat) {
        debug_assert_eq!(monomial.arity(), self.arity);
        if coeff.is_zero() {
            return;
        }
        let entry = self.terms.entry(monomial);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += coeff;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (m, c) in other.terms() {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (m, c) in other.terms() {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }

    pub fn neg(&self) -> Polynomial {
        let mut out = Polynomial::zero(self.arity);
        for (m, c) in self.terms() {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }

    pub fn scale(&self, factor: &Rat) -> Polynomial {
        let mut out = Polynomial::zero(self.arity);
        if factor.is_zero() {
            return out;
        }
        for (m, c) in self.terms() {
            out.add_term(m.clone(), c.clone() * factor);
        }
        out
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        let mut out = Polynomial::zero(self.arity);
        for (m1, c1) in self.terms() {
            for (m2, c2) in other.terms() {
                out.add_term(m1.mul(m2), c1.clone() * c2.clone());
            }
        }
        out
    }

    pub fn pow(&self, exp: u32) -> Polynomial {
        let mut out = Polynomial::constant(self.arity, Rat::one());
        for _ in 0..exp {
            out = out.mul(self);
        }
        out
    }

    /// Substitutes `replacement` for variable `var` and expands.
    pub fn substitute(&self, var: usize, replacement: &Polynomial) -> Polynomial {
        let mut out = Polynomial::zero(self.arity);
        let mut pow_cache: Vec<Polynomial> = vec![Polynomial::constant(self.arity, Rat::one())];
        for (m, c) in self.terms() {
            let e = m.exp(var) as usize;
            while pow_cache.len() <= e {
                let next = pow_cache.last().unwrap().mul(replacement);
                pow_cache.push(next);
            }
            let (_, rest) = m.split(&|v| v == var);
            let part = pow_cache[e].mul(&Polynomial::from_monomial(rest, c.clone()));
            out = out.add(&part);
        }
        out
    }

    /// True if the polynomial mentions variable `var`.
    pub fn mentions(&self, var: usize) -> bool {
        self.terms.keys().any(|m| m.exp(var) > 0)
    }

    /// Largest monomial with a nonzero coefficient.
    pub fn leading_monomial(&self) -> Option<&Monomial> {
        self.terms.keys().next_back()
    }

    pub fn eval(&self, state: &[Rat]) -> Rat {
        let mut acc = Rat::zero();
        for (m, c) in self.terms() {
            acc += c.clone() * m.eval(state);
        }
        acc
    }

    /// Renders the polynomial with terms in decreasing monomial order,
    /// e.g. `-1/2*y^2 + y + 3/2`.
    pub fn render(&self, names: &[String]) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (idx, (m, c)) in self.terms.iter().rev().enumerate() {
            let mag = c.abs();
            let neg = c < &Rat::zero();
            if idx == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let body = m.render(names);
            if body == "1" {
                out.push_str(&mag.to_string());
            } else if mag.is_one() {
                out.push_str(&body);
            } else {
                out.push_str(&format!("{}*{}", mag, body));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::rat::{rat, rint};

    fn names() -> Vec<String> {
        vec!["x".into(), "y".into()]
    }

    #[test]
    fn monomial_order_prefers_later_variables() {
        // With x declared before y: x^2 < x*y because y carries more weight.
        let x2 = Monomial::from_exps(vec![2, 0]);
        let xy = Monomial::from_exps(vec![1, 1]);
        let y = Monomial::from_exps(vec![0, 1]);
        let x = Monomial::from_exps(vec![1, 0]);
        assert!(x2 < xy);
        assert!(x < y);
        assert!(x2 < y);
        assert!(Monomial::one(2) < x);
    }

    #[test]
    fn arithmetic_keeps_terms_normalized() {
        let x = Polynomial::var(2, 0);
        let y = Polynomial::var(2, 1);
        let p = x.add(&y).mul(&x.sub(&y));
        let expect = x.mul(&x).sub(&y.mul(&y));
        assert_eq!(p, expect);
        assert!(p.sub(&expect).is_zero());
    }

    #[test]
    fn substitution_expands_powers() {
        // (x + 1)^2 for x, inside x^2 + y.
        let arity = 2;
        let x = Polynomial::var(arity, 0);
        let y = Polynomial::var(arity, 1);
        let p = x.pow(2).add(&y);
        let repl = x.add(&Polynomial::constant(arity, rint(1)));
        let got = p.substitute(0, &repl);
        let expect = x
            .pow(2)
            .add(&x.scale(&rint(2)))
            .add(&Polynomial::constant(arity, rint(1)))
            .add(&y);
        assert_eq!(got, expect);
    }

    #[test]
    fn renders_in_decreasing_order() {
        let arity = 2;
        let y = Polynomial::var(arity, 1);
        let p = y
            .pow(2)
            .scale(&rat(-1, 2))
            .add(&y)
            .add(&Polynomial::constant(arity, rat(3, 2)));
        assert_eq!(p.render(&names()), "-1/2*y^2 + y + 3/2");
    }

    #[test]
    fn evaluation_matches_structure() {
        let arity = 2;
        let x = Polynomial::var(arity, 0);
        let y = Polynomial::var(arity, 1);
        let p = x.mul(&y).add(&Polynomial::constant(arity, rint(5)));
        assert_eq!(p.eval(&[rat(1, 2), rint(4)]), rint(7));
    }
}
