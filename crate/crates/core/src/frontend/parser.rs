//! Recursive-descent parser producing the raw program shape. Structural
//! admission checks live in `validate`; this file only enforces grammar.

use crate::error::FrontendError;
use crate::symbolic::{Polynomial, Rat};

use super::lexer::{tokenize, Line, Token};

/// Comparison operator of the loop guard.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Less,
    Greater,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedBranch {
    pub expr: Polynomial,
    /// Explicit probability, absent on the final branch.
    pub prob: Option<Rat>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedUpdate {
    pub var: usize,
    pub branches: Vec<ParsedBranch>,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedProgram {
    pub var_names: Vec<String>,
    pub inits: Vec<Rat>,
    pub guard_left: Polynomial,
    pub guard_op: CmpOp,
    pub guard_right: Polynomial,
    pub guard_line: usize,
    pub updates: Vec<ParsedUpdate>,
}

/// Names that cannot be program variables because they appear in reports:
/// the iteration counter and the symbolic bound constants.
const RESERVED: [&str; 4] = ["i", "c1", "c2", "d"];

pub fn parse(source: &str) -> Result<ParsedProgram, FrontendError> {
    let lines = tokenize(source)?;
    let mut var_names: Vec<String> = Vec::new();
    let mut inits: Vec<Rat> = Vec::new();
    let mut cursor = 0;

    // Initializations run until the `while` line.
    while cursor < lines.len() && !lines[cursor].tokens.contains(&Token::While) {
        let line = &lines[cursor];
        let (name, value) = parse_init(line)?;
        if var_names.iter().any(|n| n == &name) {
            return Err(FrontendError::syntax(
                line.number,
                format!("variable `{}` is already initialized", name),
            ));
        }
        check_reserved(line.number, &name)?;
        var_names.push(name);
        inits.push(value);
        cursor += 1;
    }
    if cursor == lines.len() {
        return Err(FrontendError::syntax(
            lines.last().map_or(1, |l| l.number),
            "expected a `while` line after the initializations",
        ));
    }
    if var_names.is_empty() {
        return Err(FrontendError::syntax(
            lines[cursor].number,
            "at least one variable must be initialized before the loop",
        ));
    }

    let guard_line = &lines[cursor];
    let (guard_left, guard_op, guard_right) = parse_guard(guard_line, &var_names)?;
    let guard_line_no = guard_line.number;
    cursor += 1;

    let mut updates = Vec::new();
    while cursor < lines.len() {
        let line = &lines[cursor];
        if line.tokens.contains(&Token::While) {
            return Err(FrontendError::syntax(
                line.number,
                "nested or sequential loops are not supported; a program has exactly one `while`",
            ));
        }
        updates.push(parse_update(line, &var_names)?);
        cursor += 1;
    }
    if updates.is_empty() {
        return Err(FrontendError::syntax(
            guard_line_no,
            "the loop body must update every variable",
        ));
    }

    Ok(ParsedProgram {
        var_names,
        inits,
        guard_left,
        guard_op,
        guard_right,
        guard_line: guard_line_no,
        updates,
    })
}

fn check_reserved(line: usize, name: &str) -> Result<(), FrontendError> {
    if RESERVED.contains(&name) {
        return Err(FrontendError::syntax(
            line,
            format!("`{}` is reserved for analysis output and cannot name a variable", name),
        ));
    }
    Ok(())
}

/// `name := rational`
fn parse_init(line: &Line) -> Result<(String, Rat), FrontendError> {
    let mut p = Parser::new(line, &[]);
    let name = match p.next() {
        Some(Token::Ident(name)) => name.clone(),
        other => return Err(p.unexpected(other, "an initialization like `x := 1`")),
    };
    match p.next() {
        Some(Token::Init) => {}
        other => return Err(p.unexpected(other, "`:=`")),
    }
    let value = p.signed_number()?;
    p.expect_end()?;
    Ok((name, value))
}

/// `while expr (< | >) expr :`
fn parse_guard(line: &Line, vars: &[String]) -> Result<(Polynomial, CmpOp, Polynomial), FrontendError> {
    let mut p = Parser::new(line, vars);
    match p.next() {
        Some(Token::While) => {}
        other => return Err(p.unexpected(other, "`while`")),
    }
    let left = p.expr()?;
    let op = match p.next() {
        Some(Token::Less) => CmpOp::Less,
        Some(Token::Greater) => CmpOp::Greater,
        other => return Err(p.unexpected(other, "a strict comparison (`<` or `>`)")),
    };
    let right = p.expr()?;
    match p.next() {
        Some(Token::Colon) => {}
        other => return Err(p.unexpected(other, "`:` after the guard")),
    }
    p.expect_end()?;
    Ok((left, op, right))
}

/// `name = expr @p; expr @p; ...; expr`
fn parse_update(line: &Line, vars: &[String]) -> Result<ParsedUpdate, FrontendError> {
    let mut p = Parser::new(line, vars);
    let (var, name) = match p.next() {
        Some(Token::Ident(name)) => match vars.iter().position(|v| v == name) {
            Some(idx) => (idx, name.clone()),
            None => {
                return Err(FrontendError::syntax(
                    line.number,
                    format!("unknown variable `{}`; variables must be initialized before the loop", name),
                ))
            }
        },
        other => return Err(p.unexpected(other, "a variable update like `x = x - 1`")),
    };
    match p.next() {
        Some(Token::Assign) => {}
        Some(Token::Init) => {
            return Err(FrontendError::syntax(
                line.number,
                format!("`{}` is initialized with `:=` only before the loop; updates use `=`", name),
            ))
        }
        other => return Err(p.unexpected(other, "`=`")),
    }

    let mut branches = Vec::new();
    loop {
        let expr = p.expr()?;
        match p.next() {
            None => {
                branches.push(ParsedBranch { expr, prob: None });
                break;
            }
            Some(Token::At) => {
                let prob = p.signed_number()?;
                match p.next() {
                    Some(Token::Semicolon) => {
                        branches.push(ParsedBranch { expr, prob: Some(prob) });
                    }
                    None => {
                        return Err(FrontendError::syntax(
                            line.number,
                            "the final branch must not carry a probability; \
                             it receives the remaining mass",
                        ))
                    }
                    other => return Err(p.unexpected(other, "`;` and another branch")),
                }
            }
            other => return Err(p.unexpected(other, "`@probability` or end of line")),
        }
    }
    Ok(ParsedUpdate { var, branches, line: line.number })
}

/// Token-slice cursor with the expression grammar.
struct Parser<'a> {
    line: &'a Line,
    vars: &'a [String],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(line: &'a Line, vars: &'a [String]) -> Parser<'a> {
        Parser { line, vars, pos: 0 }
    }

    fn peek(&self) -> Option<&'a Token> {
        self.line.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<&'a Token> {
        let token = self.line.tokens.get(self.pos);
        if token.is_some() {
            self.pos += 1;
        }
        token
    }

    fn unexpected(&self, got: Option<&Token>, wanted: &str) -> FrontendError {
        let got = match got {
            Some(token) => token.describe(),
            None => "end of line".to_string(),
        };
        FrontendError::syntax(self.line.number, format!("expected {}, found {}", wanted, got))
    }

    fn expect_end(&mut self) -> Result<(), FrontendError> {
        match self.next() {
            None => Ok(()),
            other => Err(self.unexpected(other, "end of line")),
        }
    }

    /// `[-] number`
    fn signed_number(&mut self) -> Result<Rat, FrontendError> {
        let negative = matches!(self.peek(), Some(Token::Minus));
        if negative {
            self.next();
        }
        match self.next() {
            Some(Token::Number(value)) => {
                Ok(if negative { -value.clone() } else { value.clone() })
            }
            other => Err(self.unexpected(other, "a rational literal")),
        }
    }

    /// expr := term (('+' | '-') term)*
    fn expr(&mut self) -> Result<Polynomial, FrontendError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Token::Plus) => {
                    self.next();
                    acc = acc.add(&self.term()?);
                }
                Some(Token::Minus) => {
                    self.next();
                    acc = acc.sub(&self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    /// term := unary ('*' unary)*
    fn term(&mut self) -> Result<Polynomial, FrontendError> {
        let mut acc = self.unary()?;
        while matches!(self.peek(), Some(Token::Star)) {
            self.next();
            acc = acc.mul(&self.unary()?);
        }
        Ok(acc)
    }

    /// unary := '-' unary | power
    fn unary(&mut self) -> Result<Polynomial, FrontendError> {
        if matches!(self.peek(), Some(Token::Minus)) {
            self.next();
            return Ok(self.unary()?.neg());
        }
        self.power()
    }

    /// power := primary ['^' positive-integer]
    fn power(&mut self) -> Result<Polynomial, FrontendError> {
        let base = self.primary()?;
        if matches!(self.peek(), Some(Token::Caret)) {
            self.next();
            match self.next() {
                Some(Token::Number(value)) if value.is_integer() && value > &Rat::from_integer(0.into()) => {
                    let exp = u32::try_from(value.to_integer()).map_err(|_| {
                        FrontendError::syntax(self.line.number, "exponent is too large")
                    })?;
                    return Ok(base.pow(exp));
                }
                other => {
                    return Err(self.unexpected(other, "a positive integer exponent"));
                }
            }
        }
        Ok(base)
    }

    /// primary := '(' expr ')' | number | variable
    fn primary(&mut self) -> Result<Polynomial, FrontendError> {
        let arity = self.vars.len();
        match self.next() {
            Some(Token::LParen) => {
                let inner = self.expr()?;
                match self.next() {
                    Some(Token::RParen) => Ok(inner),
                    other => Err(self.unexpected(other, "`)`")),
                }
            }
            Some(Token::Number(value)) => Ok(Polynomial::constant(arity, value.clone())),
            Some(Token::Ident(name)) => match self.vars.iter().position(|v| v == name) {
                Some(idx) => Ok(Polynomial::var(arity, idx)),
                None => {
                    let hint = if RESERVED.contains(&name.as_str()) {
                        format!("`{}` is reserved for analysis output", name)
                    } else {
                        format!(
                            "unknown variable `{}`; variables must be initialized before the loop",
                            name
                        )
                    };
                    Err(FrontendError::syntax(self.line.number, hint))
                }
            },
            other => Err(self.unexpected(other, "a variable, number, or `(`")),
        }
    }
}
