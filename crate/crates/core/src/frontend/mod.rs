//! Program text frontend: lexing, parsing, and admission of loop programs.
//!
//! The surface language is line oriented:
//!
//! ```text
//! # symmetric random walk started at 10
//! x := 10
//! while x > 0:
//!     x = x + 1 @1/2; x - 1
//! ```
//!
//! Initializations come first, then a single `while` line with a strict
//! polynomial inequality, then exactly one update per variable in declaration
//! order. An update is a list of polynomial branches; every branch except the
//! last carries an explicit probability after `@`, and the last receives the
//! remaining probability mass. `#` starts a comment.
//!
//! [`parse_program`] yields a [`ValidatedProgram`] only for loops in the
//! supported class: each variable may scale itself by a non-negative constant
//! and otherwise depend polynomially only on variables declared before it.
//! That discipline is what guarantees closed-form moments later on.

mod lexer;
mod parser;
mod validate;

pub use parser::{CmpOp, ParsedBranch, ParsedProgram, ParsedUpdate};
pub use validate::{UpdateBranch, ValidatedProgram, VarUpdate};

use crate::error::FrontendError;

/// Parses and validates a program, the only entry point the rest of the
/// pipeline uses.
pub fn parse_program(source: &str) -> Result<ValidatedProgram, FrontendError> {
    let parsed = parser::parse(source)?;
    validate::validate(parsed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::{rat, rint, Monomial, Polynomial};

    #[test]
    fn parses_a_two_variable_loop() {
        let src = "\
# growing step walk
y := 0
x := 10
while x > 0:
    y = y + 1
    x = x + 4*y @1/2; x - y^2
";
        let p = parse_program(src).unwrap();
        assert_eq!(p.var_names, vec!["y".to_string(), "x".to_string()]);
        assert_eq!(p.inits, vec![rint(0), rint(10)]);
        assert_eq!(p.updates[0].branches.len(), 1);
        assert_eq!(p.updates[1].branches.len(), 2);
        assert_eq!(p.updates[1].branches[0].prob, rat(1, 2));
        assert_eq!(p.updates[1].branches[1].prob, rat(1, 2));
        // Guard is normalized to "run while G > 0".
        assert_eq!(p.guard, Polynomial::var(2, 1));
    }

    #[test]
    fn guard_direction_is_normalized() {
        let src = "\
x := 1
y := 0
while y < 100:
    x = 2*x
    y = y + x
";
        let p = parse_program(src).unwrap();
        // y < 100 becomes G = 100 - y.
        let mut expect = Polynomial::constant(2, rint(100));
        expect = expect.sub(&Polynomial::var(2, 1));
        assert_eq!(p.guard, expect);
    }

    #[test]
    fn round_trips_through_render() {
        let src = "\
y := 1
x := 10
while x*x + y > 2:
    y = 2*y @1/3; y + 1 @1/3; y
    x = x - y
";
        let p = parse_program(src).unwrap();
        let reparsed = parse_program(&p.render()).unwrap();
        assert_eq!(p, reparsed);
    }

    #[test]
    fn rejects_malformed_programs() {
        let assert_syntax = |src: &str, needle: &str| {
            match parse_program(src) {
                Err(FrontendError::Syntax { message, .. }) => {
                    assert!(message.contains(needle), "message {:?} lacks {:?}", message, needle)
                }
                other => panic!("expected syntax error with {:?}, got {:?}", needle, other),
            }
        };
        assert_syntax("x := 1\nwhile x >= 0:\n    x = x - 1\n", "strict");
        assert_syntax("x := 1\nwhile x > 0:\n    x = x/2\n", "rational literals");
        assert_syntax("x := 1\nwhile x > 0:\n    x = x - 1 @1/2\n", "final branch");
        assert_syntax("x := 1\nwhile x > 0:\n    x = y - 1\n", "unknown variable");
        assert_syntax("i := 1\nwhile i > 0:\n    i = i - 1\n", "reserved");
        assert_syntax("x := 1\nx := 2\nwhile x > 0:\n    x = x - 1\n", "already initialized");
        assert_syntax(
            "x := 1\nwhile x > 0:\n    x = x - 1\nwhile x > 0:\n    x = x - 1\n",
            "nested or sequential",
        );
        assert_syntax("x := 1\nwhile x > 0:\n    x = x^0\n", "positive integer");
    }

    #[test]
    fn rejects_programs_outside_the_supported_class() {
        let assert_unsupported = |src: &str, needle: &str| {
            match parse_program(src) {
                Err(FrontendError::NotSupported { message }) => {
                    assert!(message.contains(needle), "message {:?} lacks {:?}", message, needle)
                }
                other => panic!("expected NotSupported with {:?}, got {:?}", needle, other),
            }
        };
        assert_unsupported("x := 1\nwhile x > 0:\n    x = -2*x\n", "non-negative");
        assert_unsupported("x := 1\nwhile x > 0:\n    x = x*x\n", "linearly");
        assert_unsupported(
            "x := 1\ny := 1\nwhile x > 0:\n    x = x + y\n    y = y - 1\n",
            "declared later",
        );
        assert_unsupported(
            "x := 1\ny := 1\nwhile x > 0:\n    y = y - 1\n    x = x + 1\n",
            "declaration order",
        );
        assert_unsupported(
            "x := 1\nwhile x > 0:\n    x = x - 1 @2/3; x + 1 @1/3; x\n",
            "probabilities",
        );
        assert_unsupported("x := 1\nwhile x > 0:\n    x = x - 1 @3/2; x\n", "probabilities");
    }

    #[test]
    fn single_variable_self_product_is_nonlinear() {
        // x*y with y declared later is a forward reference; x^2 is nonlinear
        // self-dependence; both must be refused for the updated variable.
        let src = "x := 1\ny := 1\nwhile x > 0:\n    x = x*y\n    y = y\n";
        assert!(matches!(parse_program(src), Err(FrontendError::NotSupported { .. })));
    }

    #[test]
    fn zero_probability_branches_are_dropped() {
        let src = "x := 4\nwhile x > 0:\n    x = x + 1 @0; x - 1\n";
        let p = parse_program(src).unwrap();
        assert_eq!(p.updates[0].branches.len(), 1);
        assert_eq!(p.updates[0].branches[0].prob, rint(1));
    }

    #[test]
    fn guard_monomials_are_exactly_the_parsed_ones() {
        let src = "x := 0\ny := 0\nwhile x*x + y*y < 100:\n    x = x + 1 @1/2; x - 1\n    y = y + 1 @1/2; y - 1\n";
        let p = parse_program(src).unwrap();
        let g = &p.guard;
        assert_eq!(g.coeff(&Monomial::from_exps(vec![2, 0])), rint(-1));
        assert_eq!(g.coeff(&Monomial::from_exps(vec![0, 2])), rint(-1));
        assert_eq!(g.coeff(&Monomial::one(2)), rint(100));
    }
}
