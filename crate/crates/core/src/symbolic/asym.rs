//! Asymptotic growth classes of exponential polynomials.
//!
//! Every exponential polynomial eventually behaves like its dominant term
//! `c * i^d * b^i`. This module extracts that behavior as a signed growth
//! class, computes tight upper/lower envelopes of finite families (the
//! `dominating` and `dominated` combinators), takes limits, and decides
//! sound sign conditions that must hold for every iteration, not just
//! eventually. All decisions are exact; when a sign depends on the unknown
//! symbolic constants the caller receives `None` and must treat the query
//! as unanswerable rather than guess.

use num_traits::{One, Zero};

use super::exppoly::{ExpPolynomial, SymLin};
use super::rat::{rat_pow, Rat, Sign};

/// Growth magnitude `i^degree * base^i`, ordered by base first and degree
/// second; the base always wins because exponentials outgrow polynomials.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Magnitude {
    pub base: Rat,
    pub degree: u32,
}

impl Magnitude {
    /// The magnitude of a nonzero constant.
    pub fn unit() -> Magnitude {
        Magnitude { base: Rat::one(), degree: 0 }
    }

    pub fn render(&self) -> String {
        let mut factors = Vec::new();
        match self.degree {
            0 => {}
            1 => factors.push("i".to_string()),
            d => factors.push(format!("i^{}", d)),
        }
        if !self.base.is_one() {
            if self.base.is_integer() {
                factors.push(format!("{}^i", self.base));
            } else {
                factors.push(format!("({})^i", self.base));
            }
        }
        if factors.is_empty() {
            "1".to_string()
        } else {
            factors.join("*")
        }
    }
}

impl Ord for Magnitude {
    fn cmp(&self, other: &Magnitude) -> std::cmp::Ordering {
        self.base.cmp(&other.base).then(self.degree.cmp(&other.degree))
    }
}

impl PartialOrd for Magnitude {
    fn partial_cmp(&self, other: &Magnitude) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// A signed growth class: eventually zero, or `sign * Theta(magnitude)`.
///
/// The order is by eventual comparison: every negative class is below zero,
/// every positive class above, and among negatives a larger magnitude means
/// a smaller (more negative) class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrowthClass {
    pub sign: Sign,
    pub magnitude: Magnitude,
}

impl GrowthClass {
    pub fn zero() -> GrowthClass {
        GrowthClass { sign: Sign::Zero, magnitude: Magnitude { base: Rat::zero(), degree: 0 } }
    }

    /// The canonical representative `sign * i^degree * base^i`.
    pub fn realize(&self) -> ExpPolynomial {
        match self.sign {
            Sign::Zero => ExpPolynomial::zero(),
            Sign::Positive => {
                ExpPolynomial::term(self.magnitude.base.clone(), self.magnitude.degree, SymLin::from_rat(Rat::one()))
            }
            Sign::Negative => ExpPolynomial::term(
                self.magnitude.base.clone(),
                self.magnitude.degree,
                SymLin::from_rat(-Rat::one()),
            ),
        }
    }

    pub fn render(&self) -> String {
        match self.sign {
            Sign::Zero => "0".to_string(),
            Sign::Positive => self.magnitude.render(),
            Sign::Negative => format!("-{}", self.magnitude.render()),
        }
    }
}

impl Ord for GrowthClass {
    fn cmp(&self, other: &GrowthClass) -> std::cmp::Ordering {
        use std::cmp::Ordering;
        match self.sign.cmp(&other.sign) {
            Ordering::Equal => match self.sign {
                Sign::Zero => Ordering::Equal,
                Sign::Positive => self.magnitude.cmp(&other.magnitude),
                Sign::Negative => other.magnitude.cmp(&self.magnitude),
            },
            non_eq => non_eq,
        }
    }
}

impl PartialOrd for GrowthClass {
    fn partial_cmp(&self, other: &GrowthClass) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Extracts the signed class of `f`, resolving a sign-ambiguous leading
/// coefficient to `mixed_as` (the safe direction depends on the caller).
fn signed_class(f: &ExpPolynomial, mixed_as: Sign) -> GrowthClass {
    match f.leading() {
        None => GrowthClass::zero(),
        Some((base, degree, coeff)) => {
            let sign = coeff.sign_class().unwrap_or(mixed_as);
            debug_assert_ne!(sign, Sign::Zero, "normalized leading coefficient cannot be zero");
            GrowthClass { sign, magnitude: Magnitude { base: base.clone(), degree } }
        }
    }
}

/// The eventual sign of `f`, or `None` when it depends on the symbolic
/// constants. Functions that vanish from some iteration on report zero.
pub fn eventual_sign(f: &ExpPolynomial) -> Option<Sign> {
    match f.leading() {
        None => Some(Sign::Zero),
        Some((_, _, coeff)) => coeff.sign_class(),
    }
}

/// Canonical representative of the smallest class that eventually bounds all
/// of `fs` from above (up to a positive constant factor).
pub fn dominating(fs: &[ExpPolynomial]) -> ExpPolynomial {
    envelope(fs, Sign::Positive).realize()
}

/// Canonical representative of the largest class that eventually bounds all
/// of `fs` from below (up to a positive constant factor).
pub fn dominated(fs: &[ExpPolynomial]) -> ExpPolynomial {
    envelope(fs, Sign::Negative).realize()
}

/// Growth-class form of [`dominating`].
pub fn dominating_class(fs: &[ExpPolynomial]) -> GrowthClass {
    envelope(fs, Sign::Positive)
}

/// Growth-class form of [`dominated`].
pub fn dominated_class(fs: &[ExpPolynomial]) -> GrowthClass {
    envelope(fs, Sign::Negative)
}

/// Shared envelope logic; `target` is the sign that wins the envelope
/// (positive for upper envelopes, negative for lower ones).
fn envelope(fs: &[ExpPolynomial], target: Sign) -> GrowthClass {
    let classes: Vec<GrowthClass> = fs.iter().map(|f| signed_class(f, target)).collect();
    if classes.iter().any(|c| c.sign == target) {
        // One member already pushes in the target direction; the envelope
        // must absorb the largest magnitude present in the family.
        let magnitude = classes
            .iter()
            .filter(|c| c.sign != Sign::Zero)
            .map(|c| c.magnitude.clone())
            .max()
            .expect("a target-signed class is present");
        GrowthClass { sign: target, magnitude }
    } else if classes.is_empty() || classes.iter().any(|c| c.sign == Sign::Zero) {
        GrowthClass::zero()
    } else {
        // Every member points away from the target, so the envelope is the
        // one closest to zero: the smallest magnitude.
        let magnitude = classes.iter().map(|c| c.magnitude.clone()).min().unwrap();
        GrowthClass { sign: target.flip(), magnitude }
    }
}

/// Limit of `f` at infinity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Limit {
    NegInfinity,
    Finite(Rat),
    PosInfinity,
}

impl Limit {
    pub fn is_negative(&self) -> bool {
        match self {
            Limit::NegInfinity => true,
            Limit::Finite(v) => *v < Rat::zero(),
            Limit::PosInfinity => false,
        }
    }

    pub fn render(&self) -> String {
        match self {
            Limit::NegInfinity => "-infinity".to_string(),
            Limit::Finite(v) => v.to_string(),
            Limit::PosInfinity => "infinity".to_string(),
        }
    }
}

/// Limit of `f` as the iteration grows, or `None` when it depends on the
/// symbolic constants.
pub fn limit_at_infinity(f: &ExpPolynomial) -> Option<Limit> {
    match f.leading() {
        None => Some(Limit::Finite(Rat::zero())),
        Some((base, degree, coeff)) => {
            let magnitude = Magnitude { base: base.clone(), degree };
            match magnitude.cmp(&Magnitude::unit()) {
                std::cmp::Ordering::Greater => match coeff.sign_class() {
                    Some(Sign::Positive) => Some(Limit::PosInfinity),
                    Some(Sign::Negative) => Some(Limit::NegInfinity),
                    _ => None,
                },
                // Exactly the constant term survives; everything below base 1
                // decays to zero.
                std::cmp::Ordering::Equal => coeff.as_rational().map(Limit::Finite),
                std::cmp::Ordering::Less => Some(Limit::Finite(Rat::zero())),
            }
        }
    }
}

/// True if `|f|` is bounded by a constant.
pub fn is_big_o_one(f: &ExpPolynomial) -> bool {
    match f.leading() {
        None => true,
        Some((base, degree, _)) => Magnitude { base: base.clone(), degree } <= Magnitude::unit(),
    }
}

/// True if `|f|` is eventually bounded below by a positive constant.
pub fn is_big_omega_one(f: &ExpPolynomial) -> bool {
    match f.leading() {
        None => false,
        Some((base, degree, coeff)) => {
            Magnitude { base: base.clone(), degree } >= Magnitude::unit() && coeff.sign_class().is_some()
        }
    }
}

/// Iteration count past which every sub-leading term of a plain exponential
/// polynomial shrinks monotonically relative to the leading term; `None` if
/// no modest horizon exists.
fn monotone_horizon(f: &ExpPolynomial) -> Option<u64> {
    const CAP: u64 = 1 << 14;
    let (lead_base, lead_degree, _) = f.leading()?;
    let mut horizon: u64 = 1;
    for (base, degree, _) in f.iter_terms() {
        if base.is_zero() || (base == lead_base && degree == lead_degree) {
            continue;
        }
        debug_assert!(base <= lead_base);
        if base == lead_base || degree <= lead_degree {
            continue;
        }
        // Ratio (i^degree * base^i) / (i^lead_degree * lead_base^i) becomes
        // non-increasing once ((i+1)/i)^excess <= lead_base/base.
        let excess = degree - lead_degree;
        let mut candidate: u64 = 1;
        loop {
            let grown = rat_pow(&Rat::from_integer((candidate + 1).into()), excess) * base.clone();
            let held = rat_pow(&Rat::from_integer(candidate.into()), excess) * lead_base.clone();
            if grown <= held {
                break;
            }
            candidate *= 2;
            if candidate > CAP {
                return None;
            }
        }
        horizon = horizon.max(candidate);
    }
    Some(horizon)
}

/// Relative weight of the negative terms of `f` against its (positive)
/// leading term at iteration `i >= 1`.
fn negative_weight(f: &ExpPolynomial, i: u64) -> Rat {
    let (lead_base, lead_degree, _) = f.leading().expect("caller checked leading term");
    let lead_scale = rat_pow(&Rat::from_integer(i.into()), lead_degree) * rat_pow(lead_base, i as u32);
    let mut acc = Rat::zero();
    for (base, degree, coeff) in f.iter_terms() {
        if base.is_zero() || (base == lead_base && degree == lead_degree) {
            continue;
        }
        let c = coeff.as_rational().expect("plain polynomial");
        if c >= Rat::zero() {
            continue;
        }
        let scale = rat_pow(&Rat::from_integer(i.into()), degree) * rat_pow(base, i as u32);
        acc += -c * scale / lead_scale.clone();
    }
    acc
}

/// Sound decision of `f(i) >= 0` for every iteration `i >= 0`, for plain
/// (symbol-free) exponential polynomials. May conservatively answer `false`.
fn nonneg_plain(f: &ExpPolynomial) -> bool {
    debug_assert!(f.is_plain());
    if f.is_zero() {
        return true;
    }
    let Some((_, _, lead_coeff)) = f.leading() else {
        // Only an iteration-zero spike remains.
        return f.eval_symlin(0).as_rational().expect("plain polynomial") >= Rat::zero();
    };
    let lead = lead_coeff.as_rational().expect("plain polynomial");
    if lead < Rat::zero() {
        return false;
    }
    let Some(mut horizon) = monotone_horizon(f) else {
        return false;
    };
    const CAP: u64 = 1 << 14;
    loop {
        // Past the horizon all negative terms lose ground monotonically, so
        // a single weight test certifies the whole tail.
        if negative_weight(f, horizon) <= lead {
            break;
        }
        horizon *= 2;
        if horizon > CAP {
            return false;
        }
    }
    for i in 0..=horizon {
        if f.eval_symlin(i).as_rational().expect("plain polynomial") < Rat::zero() {
            return false;
        }
    }
    true
}

/// Sound decision of `f(i) <= -eps` for every `i >= 0` and some fixed
/// `eps > 0`, for plain exponential polynomials.
fn strictly_negative_plain(f: &ExpPolynomial) -> bool {
    debug_assert!(f.is_plain());
    let g = f.neg();
    let Some((base, degree, lead_coeff)) = g.leading() else {
        return false;
    };
    let lead = lead_coeff.as_rational().expect("plain polynomial");
    if lead <= Rat::zero() || (Magnitude { base: base.clone(), degree }) < Magnitude::unit() {
        return false;
    }
    let Some(mut horizon) = monotone_horizon(&g) else {
        return false;
    };
    const CAP: u64 = 1 << 14;
    loop {
        // A strict gap at the horizon plus monotone decay gives a uniform
        // positive floor on the tail (the leading scale is >= 1 there).
        if negative_weight(&g, horizon) < lead {
            break;
        }
        horizon *= 2;
        if horizon > CAP {
            return false;
        }
    }
    for i in 0..=horizon {
        if g.eval_symlin(i).as_rational().expect("plain polynomial") <= Rat::zero() {
            return false;
        }
    }
    true
}

/// Sound decision of `f(i) >= 0` for all `i >= 0`, over every positive value
/// of the symbolic constants. Decided componentwise per symbol, which is
/// sufficient but not necessary; a `false` answer may be conservative.
pub fn nonneg_for_all_i(f: &ExpPolynomial) -> bool {
    (0..4).all(|slot| nonneg_plain(&f.component(slot)))
}

/// Sound decision of `f(i) <= 0` for all `i >= 0`; see [`nonneg_for_all_i`].
pub fn nonpos_for_all_i(f: &ExpPolynomial) -> bool {
    nonneg_for_all_i(&f.neg())
}

/// Sound decision of `f(i) <= -eps` for all `i >= 0` and some constant
/// `eps > 0`: every symbol component must be non-positive throughout and at
/// least one must stay boundedly negative.
pub fn le_neg_eps_for_all_i(f: &ExpPolynomial) -> bool {
    let components: Vec<ExpPolynomial> = (0..4).map(|slot| f.component(slot)).collect();
    components.iter().all(|c| nonneg_plain(&c.neg()))
        && components.iter().any(strictly_negative_plain)
}
