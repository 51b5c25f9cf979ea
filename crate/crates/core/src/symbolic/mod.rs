//! Exact symbolic arithmetic: rationals, polynomials over program variables,
//! exponential polynomials in the loop counter, and asymptotic growth classes.

mod asym;
mod exppoly;
mod poly;
mod rat;

pub use asym::{
    dominated, dominated_class, dominating, dominating_class, eventual_sign, is_big_o_one,
    is_big_omega_one, le_neg_eps_for_all_i, limit_at_infinity, nonneg_for_all_i,
    nonpos_for_all_i, GrowthClass, Limit, Magnitude,
};
pub use exppoly::{ExpPolynomial, Sym, SymLin, SymValues};
pub use poly::{Monomial, Polynomial};
pub use rat::{bit_size, parse_rat, rat, rat_pow, rint, Rat, Sign};
