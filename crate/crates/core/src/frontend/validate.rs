//! Structural admission of parsed programs.
//!
//! A program is accepted only when every update of a variable `x` has the
//! shape `a*x + P` per branch, with `a` a non-negative rational and `P` a
//! polynomial over variables declared before `x`, and when the explicit
//! branch probabilities are rationals in `[0,1]` summing to strictly less
//! than one. These conditions make the expected value of every monomial obey
//! a first-order recurrence with constant coefficient, which the rest of the
//! pipeline relies on.

use crate::error::FrontendError;
use crate::symbolic::{Polynomial, Rat};

use num_traits::{One, Zero};

use super::parser::{CmpOp, ParsedProgram};

/// One probabilistic branch of a variable update.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UpdateBranch {
    pub expr: Polynomial,
    pub prob: Rat,
}

/// All branches updating one variable; probabilities sum to one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarUpdate {
    pub var: usize,
    pub branches: Vec<UpdateBranch>,
}

/// An admitted program. The guard is normalized so the loop runs while
/// `guard > 0`; the original comparison is kept for rendering.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidatedProgram {
    pub var_names: Vec<String>,
    pub inits: Vec<Rat>,
    pub guard: Polynomial,
    pub guard_left: Polynomial,
    pub guard_op: CmpOp,
    pub guard_right: Polynomial,
    /// Indexed by variable, in declaration order.
    pub updates: Vec<VarUpdate>,
}

impl ValidatedProgram {
    pub fn arity(&self) -> usize {
        self.var_names.len()
    }

    /// Pretty-prints the program; the output parses back to an equal program.
    pub fn render(&self) -> String {
        let names = &self.var_names;
        let mut out = String::new();
        for (name, init) in names.iter().zip(&self.inits) {
            out.push_str(&format!("{} := {}\n", name, init));
        }
        let op = match self.guard_op {
            CmpOp::Less => "<",
            CmpOp::Greater => ">",
        };
        out.push_str(&format!(
            "while {} {} {}:\n",
            self.guard_left.render(names),
            op,
            self.guard_right.render(names)
        ));
        for update in &self.updates {
            let mut parts = Vec::new();
            for (idx, branch) in update.branches.iter().enumerate() {
                if idx + 1 == update.branches.len() {
                    parts.push(branch.expr.render(names));
                } else {
                    parts.push(format!("{} @{}", branch.expr.render(names), branch.prob));
                }
            }
            out.push_str(&format!("    {} = {}\n", names[update.var], parts.join("; ")));
        }
        out
    }
}

pub fn validate(parsed: ParsedProgram) -> Result<ValidatedProgram, FrontendError> {
    let arity = parsed.var_names.len();
    let names = &parsed.var_names;

    // Exactly one update per variable, in declaration order.
    let sequence: Vec<usize> = parsed.updates.iter().map(|u| u.var).collect();
    for (idx, &var) in sequence.iter().enumerate() {
        if sequence[..idx].contains(&var) {
            return Err(FrontendError::not_supported(format!(
                "variable `{}` is updated twice",
                names[var]
            )));
        }
    }
    for var in 0..arity {
        if !sequence.contains(&var) {
            return Err(FrontendError::not_supported(format!(
                "variable `{}` has no update",
                names[var]
            )));
        }
    }
    if sequence != (0..arity).collect::<Vec<_>>() {
        return Err(FrontendError::not_supported(
            "updates must follow declaration order, so each variable \
             reads only the current values of later ones"
                .to_string(),
        ));
    }

    let mut updates = Vec::with_capacity(arity);
    for update in &parsed.updates {
        let var = update.var;

        // Resolve probabilities: explicit ones must be rationals in [0,1]
        // summing below one; the final branch takes the remainder.
        let mut sum = Rat::zero();
        for branch in &update.branches[..update.branches.len() - 1] {
            let p = branch.prob.as_ref().expect("parser attaches probabilities to all but last");
            if p < &Rat::zero() || p > &Rat::one() {
                return Err(FrontendError::not_supported(format!(
                    "branch probabilities of `{}` must be rational literals in [0,1]",
                    names[var]
                )));
            }
            sum += p.clone();
        }
        if sum >= Rat::one() {
            return Err(FrontendError::not_supported(format!(
                "explicit branch probabilities of `{}` must sum to less than 1; \
                 the final branch receives the remainder",
                names[var]
            )));
        }
        let mut branches = Vec::new();
        for (idx, branch) in update.branches.iter().enumerate() {
            let prob = if idx + 1 == update.branches.len() {
                Rat::one() - sum.clone()
            } else {
                branch.prob.clone().unwrap()
            };
            if prob.is_zero() {
                continue;
            }
            check_branch_shape(var, &branch.expr, names)?;
            branches.push(UpdateBranch { expr: branch.expr.clone(), prob });
        }
        updates.push(VarUpdate { var, branches });
    }

    let guard = match parsed.guard_op {
        CmpOp::Greater => parsed.guard_left.sub(&parsed.guard_right),
        CmpOp::Less => parsed.guard_right.sub(&parsed.guard_left),
    };

    Ok(ValidatedProgram {
        var_names: parsed.var_names,
        inits: parsed.inits,
        guard,
        guard_left: parsed.guard_left,
        guard_op: parsed.guard_op,
        guard_right: parsed.guard_right,
        updates,
    })
}

/// Enforces the `a*x + P` shape of a branch updating variable `var`.
fn check_branch_shape(var: usize, expr: &Polynomial, names: &[String]) -> Result<(), FrontendError> {
    let self_mono = crate::symbolic::Monomial::var(expr.arity(), var);
    for (mono, coeff) in expr.terms() {
        if mono == &self_mono {
            if coeff < &Rat::zero() {
                return Err(FrontendError::not_supported(format!(
                    "`{}` scales itself by {}, but self-coefficients must be non-negative",
                    names[var], coeff
                )));
            }
            continue;
        }
        if mono.exp(var) > 0 {
            return Err(FrontendError::not_supported(format!(
                "`{}` may depend on itself only linearly",
                names[var]
            )));
        }
        for later in (var + 1)..expr.arity() {
            if mono.exp(later) > 0 {
                return Err(FrontendError::not_supported(format!(
                    "`{}` depends on `{}`, which is declared later; \
                     updates may only read variables declared earlier",
                    names[var], names[later]
                )));
            }
        }
    }
    Ok(())
}
