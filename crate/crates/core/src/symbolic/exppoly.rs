//! Exponential polynomials in the loop counter.
//!
//! An [`ExpPolynomial`] is a finite sum of terms `coeff * i^d * b^i` with
//! non-negative rational bases `b` and coefficients that are rational-linear
//! combinations of three positive symbolic constants:
//!
//! * `c1`, `c2`: unknown positive initial values used when a monomial's sign
//!   cannot be pinned down (a bound may start at `c1` or `-c2`),
//! * `d`: an unknown positive scale factor recording that a bound holds only
//!   modulo a constant.
//!
//! Base `0` follows the convention `0^0 = 1`: a base-zero term contributes
//! only at iteration `0`, which lets closed forms be exact from the first
//! iteration on even when a recurrence "forgets" its initial value.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use super::rat::{rat_pow, Rat, Sign};

/// The symbolic positive constants that may appear in coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sym {
    C1,
    C2,
    D,
}

/// Concrete values for the symbolic constants, used by evaluation.
#[derive(Debug, Clone)]
pub struct SymValues {
    pub c1: Rat,
    pub c2: Rat,
    pub d: Rat,
}

impl Default for SymValues {
    fn default() -> SymValues {
        SymValues { c1: Rat::one(), c2: Rat::one(), d: Rat::one() }
    }
}

/// A rational-linear combination `k0 + k1*c1 + k2*c2 + k3*d`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct SymLin {
    parts: [Rat; 4],
}

impl SymLin {
    pub fn zero() -> SymLin {
        SymLin { parts: [Rat::zero(), Rat::zero(), Rat::zero(), Rat::zero()] }
    }

    pub fn from_rat(value: Rat) -> SymLin {
        let mut s = SymLin::zero();
        s.parts[0] = value;
        s
    }

    pub fn sym(sym: Sym) -> SymLin {
        let mut s = SymLin::zero();
        s.parts[Self::slot(sym)] = Rat::one();
        s
    }

    fn slot(sym: Sym) -> usize {
        match sym {
            Sym::C1 => 1,
            Sym::C2 => 2,
            Sym::D => 3,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.parts.iter().all(|p| p.is_zero())
    }

    /// The plain rational part (coefficient of no symbol).
    pub fn rational_part(&self) -> &Rat {
        &self.parts[0]
    }

    /// Returns the plain rational value if no symbolic part is present.
    pub fn as_rational(&self) -> Option<Rat> {
        if self.parts[1..].iter().all(|p| p.is_zero()) {
            Some(self.parts[0].clone())
        } else {
            None
        }
    }

    pub fn part(&self, slot: usize) -> &Rat {
        &self.parts[slot]
    }

    pub fn add(&self, other: &SymLin) -> SymLin {
        let mut out = self.clone();
        for (a, b) in out.parts.iter_mut().zip(&other.parts) {
            *a += b.clone();
        }
        out
    }

    pub fn neg(&self) -> SymLin {
        let mut out = self.clone();
        for a in out.parts.iter_mut() {
            *a = -a.clone();
        }
        out
    }

    pub fn sub(&self, other: &SymLin) -> SymLin {
        self.add(&other.neg())
    }

    pub fn scale(&self, factor: &Rat) -> SymLin {
        let mut out = self.clone();
        for a in out.parts.iter_mut() {
            *a *= factor.clone();
        }
        out
    }

    /// Product of two combinations. At least one side must be purely
    /// rational: the bounding pipeline never multiplies two symbolic
    /// quantities, so a symbolic product indicates an internal error.
    pub fn mul(&self, other: &SymLin) -> SymLin {
        let self_symbolic = self.parts[1..].iter().any(|p| !p.is_zero());
        let other_symbolic = other.parts[1..].iter().any(|p| !p.is_zero());
        assert!(
            !(self_symbolic && other_symbolic),
            "product of two symbolic coefficients is outside the bounding calculus"
        );
        if self_symbolic {
            self.scale(&other.parts[0])
        } else {
            other.scale(&self.parts[0])
        }
    }

    /// Sign of the combination over all positive values of the symbols:
    /// `Some(sign)` when it is the same for every valuation, `None` when the
    /// sign depends on the symbol values.
    pub fn sign_class(&self) -> Option<Sign> {
        let mut any_pos = false;
        let mut any_neg = false;
        for p in &self.parts {
            match Sign::of(p) {
                Sign::Positive => any_pos = true,
                Sign::Negative => any_neg = true,
                Sign::Zero => {}
            }
        }
        match (any_pos, any_neg) {
            (false, false) => Some(Sign::Zero),
            (true, false) => Some(Sign::Positive),
            (false, true) => Some(Sign::Negative),
            (true, true) => None,
        }
    }

    pub fn eval(&self, syms: &SymValues) -> Rat {
        self.parts[0].clone()
            + self.parts[1].clone() * syms.c1.clone()
            + self.parts[2].clone() * syms.c2.clone()
            + self.parts[3].clone() * syms.d.clone()
    }

    /// Renders e.g. `3/2`, `c1`, `-12*d`, or `(c1 + 3*d)` for sums.
    pub fn render(&self) -> String {
        let names = ["", "c1", "c2", "d"];
        let mut pieces: Vec<(Rat, &str)> = Vec::new();
        for (slot, part) in self.parts.iter().enumerate() {
            if !part.is_zero() {
                pieces.push((part.clone(), names[slot]));
            }
        }
        if pieces.is_empty() {
            return "0".to_string();
        }
        let render_piece = |(coeff, name): &(Rat, &str), lead: bool| -> String {
            let mag = if coeff < &Rat::zero() { -coeff.clone() } else { coeff.clone() };
            let sign = if coeff < &Rat::zero() {
                if lead {
                    "-".to_string()
                } else {
                    " - ".to_string()
                }
            } else if lead {
                String::new()
            } else {
                " + ".to_string()
            };
            let body = if name.is_empty() {
                mag.to_string()
            } else if mag.is_one() {
                name.to_string()
            } else {
                format!("{}*{}", mag, name)
            };
            format!("{}{}", sign, body)
        };
        let mut out = String::new();
        for (idx, piece) in pieces.iter().enumerate() {
            out.push_str(&render_piece(piece, idx == 0));
        }
        if pieces.len() > 1 {
            format!("({})", out)
        } else {
            out
        }
    }
}

/// A sum of terms `coeff * i^degree * base^i`; see the module docs.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct ExpPolynomial {
    /// base -> dense coefficient list indexed by degree in `i`.
    terms: BTreeMap<Rat, Vec<SymLin>>,
}

impl ExpPolynomial {
    pub fn zero() -> ExpPolynomial {
        ExpPolynomial { terms: BTreeMap::new() }
    }

    pub fn constant(value: Rat) -> ExpPolynomial {
        ExpPolynomial::term(Rat::one(), 0, SymLin::from_rat(value))
    }

    pub fn from_symlin(coeff: SymLin) -> ExpPolynomial {
        ExpPolynomial::term(Rat::one(), 0, coeff)
    }

    /// Builds the single term `coeff * i^degree * base^i`.
    pub fn term(base: Rat, degree: u32, coeff: SymLin) -> ExpPolynomial {
        let mut out = ExpPolynomial::zero();
        out.add_term(base, degree, coeff);
        out
    }

    /// Adds `coeff * i^degree * base^i` in place.
    pub fn add_term(&mut self, base: Rat, degree: u32, coeff: SymLin) {
        assert!(base >= Rat::zero(), "exponential bases must be non-negative");
        if coeff.is_zero() {
            return;
        }
        // i^d * 0^i vanishes for every i when d > 0 (at i = 0 the factor i^d
        // is 0, afterwards 0^i is), so only degree-0 base-zero terms exist.
        if base.is_zero() && degree > 0 {
            return;
        }
        let poly = self.terms.entry(base.clone()).or_default();
        if poly.len() <= degree as usize {
            poly.resize(degree as usize + 1, SymLin::zero());
        }
        poly[degree as usize] = poly[degree as usize].add(&coeff);
        while poly.last().is_some_and(|c| c.is_zero()) {
            poly.pop();
        }
        if poly.is_empty() {
            self.terms.remove(&base);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Iterates `(base, degree, coeff)` with bases ascending.
    pub fn iter_terms(&self) -> impl Iterator<Item = (&Rat, u32, &SymLin)> {
        self.terms.iter().flat_map(|(base, poly)| {
            poly.iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(move |(deg, c)| (base, deg as u32, c))
        })
    }

    pub fn add(&self, other: &ExpPolynomial) -> ExpPolynomial {
        let mut out = self.clone();
        for (base, deg, coeff) in other.iter_terms() {
            out.add_term(base.clone(), deg, coeff.clone());
        }
        out
    }

    pub fn sub(&self, other: &ExpPolynomial) -> ExpPolynomial {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> ExpPolynomial {
        let mut out = ExpPolynomial::zero();
        for (base, deg, coeff) in self.iter_terms() {
            out.add_term(base.clone(), deg, coeff.neg());
        }
        out
    }

    pub fn scale(&self, factor: &Rat) -> ExpPolynomial {
        let mut out = ExpPolynomial::zero();
        for (base, deg, coeff) in self.iter_terms() {
            out.add_term(base.clone(), deg, coeff.scale(factor));
        }
        out
    }

    pub fn scale_symlin(&self, factor: &SymLin) -> ExpPolynomial {
        let mut out = ExpPolynomial::zero();
        for (base, deg, coeff) in self.iter_terms() {
            out.add_term(base.clone(), deg, coeff.mul(factor));
        }
        out
    }

    pub fn mul(&self, other: &ExpPolynomial) -> ExpPolynomial {
        let mut out = ExpPolynomial::zero();
        for (b1, d1, c1) in self.iter_terms() {
            for (b2, d2, c2) in other.iter_terms() {
                // 0^i * b^i = 0^i only matches at i = 0 where both are 1, so
                // the product base 0 * b = 0 is exactly right.
                out.add_term(b1.clone() * b2.clone(), d1 + d2, c1.mul(c2));
            }
        }
        out
    }

    pub fn pow(&self, exp: u32) -> ExpPolynomial {
        let mut out = ExpPolynomial::constant(Rat::one());
        for _ in 0..exp {
            out = out.mul(self);
        }
        out
    }

    /// The function `i -> self(i + 1)`. Base-zero terms vanish because
    /// `0^(i+1) = 0` for every `i >= 0`.
    pub fn shift_forward(&self) -> ExpPolynomial {
        let mut out = ExpPolynomial::zero();
        for (base, poly) in &self.terms {
            if base.is_zero() {
                continue;
            }
            for (deg, coeff) in poly.iter().enumerate() {
                if coeff.is_zero() {
                    continue;
                }
                // (i+1)^deg expanded by the binomial theorem, times base^1.
                for k in 0..=deg {
                    let binom = binomial(deg as u32, k as u32);
                    let scaled = coeff.scale(&(Rat::from_integer(binom.into()) * base.clone()));
                    out.add_term(base.clone(), k as u32, scaled);
                }
            }
        }
        out
    }

    /// The coefficient (as a full combination) of `i^degree * base^i`.
    pub fn coeff(&self, base: &Rat, degree: u32) -> SymLin {
        self.terms
            .get(base)
            .and_then(|poly| poly.get(degree as usize))
            .cloned()
            .unwrap_or_else(SymLin::zero)
    }

    /// Evaluates at iteration `i` with the given symbol values.
    pub fn eval(&self, i: u64, syms: &SymValues) -> Rat {
        self.eval_symlin(i).eval(syms)
    }

    /// Evaluates the scalar part `i^d * b^i` of every term, leaving the
    /// symbolic coefficients intact.
    pub fn eval_symlin(&self, i: u64) -> SymLin {
        let mut acc = SymLin::zero();
        for (base, poly) in &self.terms {
            if base.is_zero() {
                if i == 0 {
                    acc = acc.add(&poly[0]);
                }
                continue;
            }
            let base_pow = rat_pow(base, i as u32);
            for (deg, coeff) in poly.iter().enumerate() {
                if coeff.is_zero() {
                    continue;
                }
                let i_pow = if deg == 0 {
                    Rat::one()
                } else if i == 0 {
                    Rat::zero()
                } else {
                    rat_pow(&Rat::from_integer(i.into()), deg as u32)
                };
                acc = acc.add(&coeff.scale(&(i_pow * base_pow.clone())));
            }
        }
        acc
    }

    /// Largest base with any surviving term, together with its top degree and
    /// that coefficient; base-zero terms are invisible asymptotically and are
    /// skipped. `None` means the function is eventually zero.
    pub fn leading(&self) -> Option<(&Rat, u32, &SymLin)> {
        for (base, poly) in self.terms.iter().rev() {
            if base.is_zero() {
                continue;
            }
            let deg = poly.len() - 1;
            return Some((base, deg as u32, &poly[deg]));
        }
        None
    }

    /// Projects out one symbol slot (0 = plain, 1 = c1, 2 = c2, 3 = d) as a
    /// purely rational exponential polynomial.
    pub fn component(&self, slot: usize) -> ExpPolynomial {
        let mut out = ExpPolynomial::zero();
        for (base, deg, coeff) in self.iter_terms() {
            out.add_term(base.clone(), deg, SymLin::from_rat(coeff.part(slot).clone()));
        }
        out
    }

    /// True if no coefficient mentions a symbolic constant.
    pub fn is_plain(&self) -> bool {
        self.iter_terms().all(|(_, _, c)| c.as_rational().is_some())
    }

    /// Renders with bases descending and degrees descending within a base,
    /// e.g. `c1*2^i - d*i^2 + 3`.
    pub fn render(&self) -> String {
        let mut parts: Vec<String> = Vec::new();
        for (base, poly) in self.terms.iter().rev() {
            for (deg, coeff) in poly.iter().enumerate().rev() {
                if coeff.is_zero() {
                    continue;
                }
                let mut factors: Vec<String> = Vec::new();
                let coeff_str = coeff.render();
                match deg {
                    0 => {}
                    1 => factors.push("i".to_string()),
                    _ => factors.push(format!("i^{}", deg)),
                }
                if !base.is_one() {
                    let base_str = if base.is_integer() && *base >= Rat::zero() {
                        format!("{}^i", base)
                    } else {
                        format!("({})^i", base)
                    };
                    factors.push(base_str);
                }
                let body = factors.join("*");
                let term = if body.is_empty() {
                    coeff_str
                } else if coeff_str == "1" {
                    body
                } else if coeff_str == "-1" {
                    format!("-{}", body)
                } else {
                    format!("{}*{}", coeff_str, body)
                };
                parts.push(term);
            }
        }
        if parts.is_empty() {
            return "0".to_string();
        }
        let mut out = parts[0].clone();
        for term in &parts[1..] {
            if let Some(rest) = term.strip_prefix('-') {
                out.push_str(" - ");
                out.push_str(rest);
            } else {
                out.push_str(" + ");
                out.push_str(term);
            }
        }
        out
    }
}

/// Binomial coefficient; degrees stay tiny so u64 is plenty.
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
    use crate::symbolic::rat::{rat, rint};

    fn sl(v: i64) -> SymLin {
        SymLin::from_rat(rint(v))
    }

    #[test]
    fn base_zero_contributes_only_at_iteration_zero() {
        let f = ExpPolynomial::term(rint(0), 0, sl(5));
        assert_eq!(f.eval(0, &SymValues::default()), rint(5));
        assert_eq!(f.eval(1, &SymValues::default()), rint(0));
        assert_eq!(f.eval(7, &SymValues::default()), rint(0));
        assert!(f.shift_forward().is_zero());
    }

    #[test]
    fn shift_forward_expands_binomially() {
        // f(i) = i^2 * 2^i, so f(i+1) = 2*(i^2 + 2i + 1) * 2^i.
        let f = ExpPolynomial::term(rint(2), 2, sl(1));
        let g = f.shift_forward();
        assert_eq!(g.coeff(&rint(2), 2), sl(2));
        assert_eq!(g.coeff(&rint(2), 1), sl(4));
        assert_eq!(g.coeff(&rint(2), 0), sl(2));
        for i in 0..6u64 {
            assert_eq!(g.eval(i, &SymValues::default()), f.eval(i + 1, &SymValues::default()));
        }
    }

    #[test]
    fn symbolic_coefficients_track_through_arithmetic() {
        let c1 = SymLin::sym(Sym::C1);
        let f = ExpPolynomial::term(rint(2), 0, c1.clone());
        let g = f.scale(&rint(3)).sub(&f);
        assert_eq!(g.coeff(&rint(2), 0), c1.scale(&rint(2)));
        let vals = SymValues { c1: rat(7, 2), ..SymValues::default() };
        assert_eq!(g.eval(2, &vals), rint(28));
    }

    #[test]
    #[should_panic(expected = "symbolic")]
    fn symbolic_products_are_rejected() {
        let a = SymLin::sym(Sym::C1);
        let b = SymLin::sym(Sym::D);
        let _ = a.mul(&b);
    }

    #[test]
    fn renders_canonically() {
        let mut f = ExpPolynomial::term(rint(2), 0, SymLin::sym(Sym::C1));
        f.add_term(rint(1), 2, SymLin::sym(Sym::D).neg());
        f.add_term(rint(1), 0, SymLin::from_rat(rint(3)));
        assert_eq!(f.render(), "c1*2^i - d*i^2 + 3");
        let g = ExpPolynomial::term(rat(1, 2), 1, sl(1));
        assert_eq!(g.render(), "i*(1/2)^i");
    }

    #[test]
    fn leading_skips_base_zero() {
        let mut f = ExpPolynomial::term(rint(0), 0, sl(9));
        assert!(f.leading().is_none());
        f.add_term(rat(1, 2), 3, sl(-2));
        let (base, deg, coeff) = f.leading().unwrap();
        assert_eq!((base.clone(), deg, coeff.clone()), (rat(1, 2), 3, sl(-2)));
    }
}
