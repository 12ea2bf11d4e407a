//! Parser for the clause notation.
//!
//! ```text
//! :- mode(int).                      % optional, default is rational
//! false :- M>Sum, M>=0, sum_upto(M,Sum).
//! p(X+3,Y) :- X>3, p(X,Y).
//! q2 :- true.
//! ```

use std::collections::BTreeMap;

use num::{BigInt, Zero};
use thiserror::Error;

use super::clause::{Atom, Clause, Head, Mode, Pred, Program};
use super::constraint::{AtomicConstraint, CmpOp, LinearConstraint};
use super::term::{LinearTerm, Rat, Var};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("{line}:{col}: syntax error: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("{line}:{col}: predicate `{pred}` used with arity {found}, previously {expected}")]
    Arity { line: usize, col: usize, pred: String, expected: usize, found: usize },
    #[error("{line}:{col}: non-linear term (product of two non-constant factors)")]
    NonLinear { line: usize, col: usize },
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Lower(String),
    Upper(String),
    Num(BigInt),
    LParen,
    RParen,
    Comma,
    Dot,
    Neck,
    Plus,
    Minus,
    Star,
    Slash,
    Cmp(CmpOp),
    Eof,
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    macro_rules! push {
        ($t:expr, $len:expr, $l:expr, $c:expr) => {{
            out.push(Spanned { tok: $t, line: $l, col: $c });
            i += $len;
            col += $len;
        }};
    }
    while i < chars.len() {
        let ch = chars[i];
        let (l, c) = (line, col);
        match ch {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            ch if ch.is_whitespace() => {
                i += 1;
                col += 1;
            }
            '%' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '(' => push!(Tok::LParen, 1, l, c),
            ')' => push!(Tok::RParen, 1, l, c),
            ',' => push!(Tok::Comma, 1, l, c),
            '.' => push!(Tok::Dot, 1, l, c),
            '+' => push!(Tok::Plus, 1, l, c),
            '-' => push!(Tok::Minus, 1, l, c),
            '*' => push!(Tok::Star, 1, l, c),
            '/' => push!(Tok::Slash, 1, l, c),
            ':' if chars.get(i + 1) == Some(&'-') => push!(Tok::Neck, 2, l, c),
            '=' if chars.get(i + 1) == Some(&'<') => push!(Tok::Cmp(CmpOp::Le), 2, l, c),
            '=' if chars.get(i + 1) == Some(&'\\') && chars.get(i + 2) == Some(&'=') => {
                push!(Tok::Cmp(CmpOp::Ne), 3, l, c)
            }
            '=' => push!(Tok::Cmp(CmpOp::Eq), 1, l, c),
            '<' => push!(Tok::Cmp(CmpOp::Lt), 1, l, c),
            '>' if chars.get(i + 1) == Some(&'=') => push!(Tok::Cmp(CmpOp::Ge), 2, l, c),
            '>' => push!(Tok::Cmp(CmpOp::Gt), 1, l, c),
            ch if ch.is_ascii_digit() => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let s: String = chars[start..i].iter().collect();
                col += i - start;
                out.push(Spanned { tok: Tok::Num(s.parse().expect("digits")), line: l, col: c });
            }
            ch if ch.is_ascii_alphabetic() || ch == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                let s: String = chars[start..i].iter().collect();
                col += i - start;
                let tok = if ch.is_ascii_lowercase() { Tok::Lower(s) } else { Tok::Upper(s) };
                out.push(Spanned { tok, line: l, col: c });
            }
            other => {
                return Err(ParseError::Syntax { line: l, col: c, msg: format!("unexpected character `{other}`") });
            }
        }
    }
    out.push(Spanned { tok: Tok::Eof, line, col });
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    arities: BTreeMap<Pred, usize>,
}

/// Parses a whole program.
pub fn parse_program(text: &str) -> Result<Program, ParseError> {
    let mut p = Parser { toks: lex(text)?, pos: 0, arities: BTreeMap::new() };
    let mut prog = Program::default();
    while p.peek() != &Tok::Eof {
        if p.peek() == &Tok::Neck {
            prog.mode = p.directive()?;
        } else {
            prog.clauses.push(p.clause()?);
        }
    }
    Ok(prog)
}

/// Parses a single clause (the trailing `.` is optional).
pub fn parse_clause(text: &str) -> Result<Clause, ParseError> {
    let t = text.trim();
    let owned = if t.ends_with('.') { t.to_string() } else { format!("{t}.") };
    let prog = parse_program(&owned)?;
    match prog.clauses.len() {
        1 => Ok(prog.clauses.into_iter().next().unwrap()),
        n => Err(ParseError::Syntax { line: 1, col: 1, msg: format!("expected one clause, found {n}") }),
    }
}

/// Parses a conjunction of constraints such as `X>=0, Y=X+1` (or `true`).
pub fn parse_constraint(text: &str) -> Result<LinearConstraint, ParseError> {
    let mut p = Parser { toks: lex(text)?, pos: 0, arities: BTreeMap::new() };
    let mut c = LinearConstraint::top();
    if p.peek() == &Tok::Eof {
        return Ok(c);
    }
    loop {
        if p.peek() == &Tok::Lower("true".into()) {
            p.bump();
        } else {
            c.push(p.relation()?);
        }
        match p.peek() {
            Tok::Comma => p.bump(),
            Tok::Eof => break,
            _ => return Err(p.err("expected `,` or end of constraint")),
        }
    }
    Ok(c)
}

/// Parses a linear term such as `2*X-Y+1/2`.
pub fn parse_term(text: &str) -> Result<LinearTerm, ParseError> {
    let mut p = Parser { toks: lex(text)?, pos: 0, arities: BTreeMap::new() };
    let t = p.sum()?;
    if p.peek() != &Tok::Eof {
        return Err(p.err("trailing input after term"));
    }
    Ok(t)
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn bump(&mut self) {
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
    }

    fn err(&self, msg: &str) -> ParseError {
        let s = &self.toks[self.pos];
        let found = match &s.tok {
            Tok::Eof => "end of input".to_string(),
            t => format!("{t:?}"),
        };
        ParseError::Syntax { line: s.line, col: s.col, msg: format!("{msg} (found {found})") }
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<(), ParseError> {
        if self.peek() == &t {
            self.bump();
            Ok(())
        } else {
            Err(self.err(&format!("expected {what}")))
        }
    }

    fn directive(&mut self) -> Result<Mode, ParseError> {
        self.expect(Tok::Neck, "`:-`")?;
        match self.peek().clone() {
            Tok::Lower(s) if s == "mode" => self.bump(),
            _ => return Err(self.err("expected `mode(...)` directive")),
        }
        self.expect(Tok::LParen, "`(`")?;
        let mode = match self.peek().clone() {
            Tok::Lower(s) => s.parse::<Mode>().map_err(|m| self.err(&m))?,
            _ => return Err(self.err("expected `int` or `rat`")),
        };
        self.bump();
        self.expect(Tok::RParen, "`)`")?;
        self.expect(Tok::Dot, "`.`")?;
        Ok(mode)
    }

    fn clause(&mut self) -> Result<Clause, ParseError> {
        let head = match self.peek().clone() {
            Tok::Lower(s) if s == "false" => {
                self.bump();
                Head::False
            }
            Tok::Lower(_) => Head::Atom(self.atom()?),
            _ => return Err(self.err("expected clause head")),
        };
        let mut constraint = LinearConstraint::top();
        let mut body = Vec::new();
        if self.peek() == &Tok::Neck {
            self.bump();
            loop {
                match self.peek().clone() {
                    Tok::Lower(s) if s == "true" => self.bump(),
                    Tok::Lower(s) if s == "false" => {
                        return Err(self.err("`false` may only appear as a clause head"));
                    }
                    Tok::Lower(_) => body.push(self.atom()?),
                    _ => constraint.push(self.relation()?),
                }
                if self.peek() == &Tok::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::Dot, "`.` at end of clause")?;
        Ok(Clause::new(head, constraint, body))
    }

    fn atom(&mut self) -> Result<Atom, ParseError> {
        let (line, col) = (self.toks[self.pos].line, self.toks[self.pos].col);
        let name = match self.peek().clone() {
            Tok::Lower(s) => s,
            _ => return Err(self.err("expected predicate name")),
        };
        self.bump();
        let mut args = Vec::new();
        if self.peek() == &Tok::LParen {
            self.bump();
            loop {
                args.push(self.sum()?);
                match self.peek() {
                    Tok::Comma => self.bump(),
                    Tok::RParen => {
                        self.bump();
                        break;
                    }
                    _ => return Err(self.err("expected `,` or `)` in argument list")),
                }
            }
        }
        let pred = Pred::new(&name);
        match self.arities.get(&pred) {
            Some(&n) if n != args.len() => {
                return Err(ParseError::Arity { line, col, pred: name, expected: n, found: args.len() });
            }
            Some(_) => {}
            None => {
                self.arities.insert(pred.clone(), args.len());
            }
        }
        Ok(Atom::new(pred, args))
    }

    fn relation(&mut self) -> Result<AtomicConstraint, ParseError> {
        let lhs = self.sum()?;
        let op = match self.peek() {
            Tok::Cmp(op) => *op,
            _ => return Err(self.err("expected a comparison operator")),
        };
        self.bump();
        let rhs = self.sum()?;
        Ok(AtomicConstraint::new(&lhs, op, &rhs))
    }

    fn sum(&mut self) -> Result<LinearTerm, ParseError> {
        let mut acc = self.product()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    acc = acc.plus(&self.product()?);
                }
                Tok::Minus => {
                    self.bump();
                    acc = acc.minus(&self.product()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn product(&mut self) -> Result<LinearTerm, ParseError> {
        let mut acc = self.factor()?;
        while self.peek() == &Tok::Star {
            let (line, col) = (self.toks[self.pos].line, self.toks[self.pos].col);
            self.bump();
            let rhs = self.factor()?;
            acc = match (acc.as_constant(), rhs.as_constant()) {
                (Some(k), _) => rhs.scaled(k),
                (_, Some(k)) => acc.scaled(k),
                _ => return Err(ParseError::NonLinear { line, col }),
            };
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<LinearTerm, ParseError> {
        match self.peek().clone() {
            Tok::Minus => {
                self.bump();
                Ok(self.factor()?.negated())
            }
            Tok::Plus => {
                self.bump();
                self.factor()
            }
            Tok::Num(n) => {
                self.bump();
                if self.peek() == &Tok::Slash {
                    self.bump();
                    let d = match self.peek().clone() {
                        Tok::Num(d) if !d.is_zero() => d,
                        _ => return Err(self.err("expected a non-zero denominator")),
                    };
                    self.bump();
                    Ok(LinearTerm::constant(Rat::new(n, d)))
                } else {
                    Ok(LinearTerm::constant(Rat::from_integer(n)))
                }
            }
            Tok::Upper(s) => {
                self.bump();
                Ok(LinearTerm::var(Var::new(&s)))
            }
            Tok::LParen => {
                self.bump();
                let t = self.sum()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(t)
            }
            _ => Err(self.err("expected a term")),
        }
    }
}
