//! Recursive-descent parser for the imperative language and its pragmas.
//!
//! ```text
//! program  ::= function*
//! function ::= "int" ident "(" ("int" ident ("," "int" ident)*)? ")" "{" stmt* "return" expr ";" "}"
//! stmt     ::= "int" ident ("=" rhs)? ";" | ident ("=" | "+=" | "-=") rhs ";" | ident ("++" | "--") ";"
//!            | "if" "(" cond ")" block ("else" (block | if-stmt))? | "while" "(" cond ")" block
//! rhs      ::= expr | ident "(" (expr ("," expr)*)? ")"
//! cond     ::= conj ("||" conj)*      conj ::= unary ("&&" unary)*
//! unary    ::= "!" unary | "(" cond ")" | "true" | "false" | expr cmp expr
//! ```
//!
//! Line comments starting with `pre:`, `post:` or `entry:` are pragmas; in
//! pragmas a `,` also separates conjuncts.

use std::collections::BTreeSet;

use super::ast::{Entry, Function, ImpProgram, Stmt, TripleSpec};
use super::cond::Cond;
use super::ImpError;
use crate::syntax::{rat, AtomicConstraint, CmpOp, LinearConstraint, LinearTerm, Var};

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Num(i64),
    Sym(&'static str),
}

const SYMBOLS: [&str; 26] = [
    "&&", "||", "<=", ">=", "==", "!=", "+=", "-=", "++", "--", "(", ")", "{", "}", ",", ";", "=", "+", "-", "*",
    "/", "%", "<", ">", "!", "&",
];

#[derive(Clone, Copy, PartialEq, Eq)]
enum PragmaKind {
    Pre,
    Post,
    Entry,
}

struct Lexed {
    toks: Vec<(Tok, usize)>,
    pragmas: Vec<(PragmaKind, String, usize)>,
}

fn lex(text: &str) -> Result<Lexed, ImpError> {
    let mut toks = Vec::new();
    let mut pragmas = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let (mut i, mut line) = (0, 1);
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            line += 1;
            i += 1;
        } else if c.is_whitespace() {
            i += 1;
        } else if c == '/' && chars.get(i + 1) == Some(&'/') {
            let start = i + 2;
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            let body: String = chars[start..i].iter().collect();
            let body = body.trim();
            for (prefix, kind) in [("pre:", PragmaKind::Pre), ("post:", PragmaKind::Post), ("entry:", PragmaKind::Entry)] {
                if let Some(rest) = body.strip_prefix(prefix) {
                    pragmas.push((kind, rest.trim().to_string(), line));
                }
            }
        } else if c == '/' && chars.get(i + 1) == Some(&'*') {
            i += 2;
            while i < chars.len() && !(chars[i] == '*' && chars.get(i + 1) == Some(&'/')) {
                if chars[i] == '\n' {
                    line += 1;
                }
                i += 1;
            }
            if i >= chars.len() {
                return Err(ImpError::Syntax { line, msg: "unterminated comment".into() });
            }
            i += 2;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            let n = s.parse().map_err(|_| ImpError::Syntax { line, msg: format!("integer `{s}` out of range") })?;
            toks.push((Tok::Num(n), line));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            toks.push((Tok::Ident(chars[start..i].iter().collect()), line));
        } else {
            let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
            let sym = SYMBOLS
                .iter()
                .find(|s| rest.starts_with(**s))
                .ok_or_else(|| ImpError::Syntax { line, msg: format!("unexpected character `{c}`") })?;
            toks.push((Tok::Sym(sym), line));
            i += sym.len();
        }
    }
    Ok(Lexed { toks, pragmas })
}

const KEYWORDS: [&str; 7] = ["int", "if", "else", "while", "return", "true", "false"];

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    /// Identifiers that may appear in expressions.
    scope: BTreeSet<String>,
    /// In a pragma `,` is conjunction and any identifier is a variable.
    pragma: bool,
}

type R<T> = Result<T, ImpError>;

impl Parser {
    fn new(toks: Vec<(Tok, usize)>) -> Self {
        Parser { toks, pos: 0, scope: BTreeSet::new(), pragma: false }
    }

    fn line(&self) -> usize {
        self.toks.get(self.pos).or(self.toks.last()).map_or(1, |t| t.1)
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.pos + k).map(|t| &t.0)
    }

    fn at_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Some(Tok::Sym(t)) if *t == s)
    }

    fn at_kw(&self, s: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(t)) if t == s)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        let hit = self.at_sym(s);
        if hit {
            self.pos += 1;
        }
        hit
    }

    fn eat_kw(&mut self, s: &str) -> bool {
        let hit = self.at_kw(s);
        if hit {
            self.pos += 1;
        }
        hit
    }

    fn err<T>(&self, msg: impl Into<String>) -> R<T> {
        Err(ImpError::Syntax { line: self.line(), msg: msg.into() })
    }

    fn describe(&self) -> String {
        match self.peek() {
            None => "end of input".into(),
            Some(Tok::Ident(s)) => format!("`{s}`"),
            Some(Tok::Num(n)) => format!("`{n}`"),
            Some(Tok::Sym(s)) => format!("`{s}`"),
        }
    }

    fn expect_sym(&mut self, s: &str) -> R<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.err(format!("expected `{s}`, found {}", self.describe()))
        }
    }

    fn expect_kw(&mut self, s: &str) -> R<()> {
        if self.eat_kw(s) {
            Ok(())
        } else {
            self.err(format!("expected `{s}`, found {}", self.describe()))
        }
    }

    fn ident(&mut self) -> R<String> {
        match self.peek() {
            Some(Tok::Ident(s)) if !KEYWORDS.contains(&s.as_str()) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => self.err(format!("expected identifier, found {}", self.describe())),
        }
    }

    fn variable(&mut self) -> R<String> {
        let line = self.line();
        let name = self.ident()?;
        if self.at_sym("(") {
            return self.err(format!("call to `{name}` is only allowed as the right-hand side of an assignment"));
        }
        if !self.pragma && !self.scope.contains(&name) {
            return Err(ImpError::UnknownIdentifier { line, name });
        }
        Ok(name)
    }

    fn function(&mut self) -> R<(Function, Vec<(String, usize, usize)>)> {
        self.expect_kw("int")?;
        let name = self.ident()?;
        self.expect_sym("(")?;
        let mut params = Vec::new();
        if !self.at_sym(")") {
            loop {
                self.expect_kw("int")?;
                let p = self.ident()?;
                if params.contains(&p) {
                    return self.err(format!("duplicate parameter `{p}`"));
                }
                params.push(p);
                if !self.eat_sym(",") {
                    break;
                }
            }
        }
        self.expect_sym(")")?;
        self.expect_sym("{")?;
        self.scope = params.iter().cloned().collect();
        let mut locals = Vec::new();
        let mut calls = Vec::new();
        let body = self.stmts(&mut locals, &mut calls)?;
        if !self.eat_kw("return") {
            return self.err(format!("expected statement or `return`, found {}", self.describe()));
        }
        let ret = self.expr()?;
        self.expect_sym(";")?;
        self.expect_sym("}")?;
        Ok((Function { name, params, locals, body, ret }, calls))
    }

    fn stmts(&mut self, locals: &mut Vec<String>, calls: &mut Vec<(String, usize, usize)>) -> R<Vec<Stmt>> {
        let mut out = Vec::new();
        while !self.at_sym("}") && !self.at_kw("return") && self.peek().is_some() {
            if let Some(s) = self.stmt(locals, calls)? {
                out.push(s);
            }
        }
        Ok(out)
    }

    fn block(&mut self, locals: &mut Vec<String>, calls: &mut Vec<(String, usize, usize)>) -> R<Vec<Stmt>> {
        self.expect_sym("{")?;
        let body = self.stmts(locals, calls)?;
        if self.at_kw("return") {
            return self.err("`return` is only allowed at the end of a function");
        }
        self.expect_sym("}")?;
        Ok(body)
    }

    fn stmt(&mut self, locals: &mut Vec<String>, calls: &mut Vec<(String, usize, usize)>) -> R<Option<Stmt>> {
        if self.eat_kw("int") {
            let v = self.ident()?;
            if self.scope.contains(&v) {
                return self.err(format!("`{v}` is already declared"));
            }
            let init = if self.eat_sym("=") { Some(self.rhs(&v, calls)?) } else { None };
            self.expect_sym(";")?;
            self.scope.insert(v.clone());
            locals.push(v);
            return Ok(init);
        }
        if self.eat_kw("if") {
            self.expect_sym("(")?;
            let cond = self.cond()?;
            self.expect_sym(")")?;
            let then = self.block(locals, calls)?;
            let els = if self.eat_kw("else") {
                if self.at_kw("if") {
                    self.stmt(locals, calls)?.into_iter().collect()
                } else {
                    self.block(locals, calls)?
                }
            } else {
                Vec::new()
            };
            return Ok(Some(Stmt::If { cond, then, els }));
        }
        if self.eat_kw("while") {
            self.expect_sym("(")?;
            let cond = self.cond()?;
            self.expect_sym(")")?;
            let body = self.block(locals, calls)?;
            return Ok(Some(Stmt::While { cond, body }));
        }
        let v = self.variable()?;
        let current = LinearTerm::var(Var::new(&v));
        let s = if self.eat_sym("=") {
            self.rhs(&v, calls)?
        } else if self.eat_sym("+=") {
            Stmt::Assign { expr: current.plus(&self.expr()?), var: v }
        } else if self.eat_sym("-=") {
            Stmt::Assign { expr: current.minus(&self.expr()?), var: v }
        } else if self.eat_sym("++") {
            Stmt::Assign { expr: current.plus(&LinearTerm::int(1)), var: v }
        } else if self.eat_sym("--") {
            Stmt::Assign { expr: current.minus(&LinearTerm::int(1)), var: v }
        } else {
            return self.err(format!("expected assignment to `{v}`, found {}", self.describe()));
        };
        self.expect_sym(";")?;
        Ok(Some(s))
    }

    fn rhs(&mut self, var: &str, calls: &mut Vec<(String, usize, usize)>) -> R<Stmt> {
        let is_call = matches!((self.peek(), self.peek_at(1)), (Some(Tok::Ident(f)), Some(Tok::Sym("("))) if !KEYWORDS.contains(&f.as_str()));
        if !is_call {
            return Ok(Stmt::Assign { var: var.to_string(), expr: self.expr()? });
        }
        let line = self.line();
        let func = self.ident()?;
        let args = self.args()?;
        if !self.at_sym(";") {
            return self.err(format!("a call to `{func}` must be the whole right-hand side"));
        }
        calls.push((func.clone(), args.len(), line));
        Ok(Stmt::Call { var: var.to_string(), func, args })
    }

    fn args(&mut self) -> R<Vec<LinearTerm>> {
        self.expect_sym("(")?;
        let mut args = Vec::new();
        if !self.at_sym(")") {
            loop {
                args.push(self.expr()?);
                if !self.eat_sym(",") {
                    break;
                }
            }
        }
        self.expect_sym(")")?;
        Ok(args)
    }

    fn cond(&mut self) -> R<Cond> {
        let mut c = self.conj()?;
        while self.eat_sym("||") {
            c = Cond::Or(Box::new(c), Box::new(self.conj()?));
        }
        Ok(c)
    }

    fn conj(&mut self) -> R<Cond> {
        let mut c = self.unary()?;
        while self.eat_sym("&&") || (self.pragma && self.eat_sym(",")) {
            c = Cond::And(Box::new(c), Box::new(self.unary()?));
        }
        Ok(c)
    }

    fn unary(&mut self) -> R<Cond> {
        if self.eat_sym("!") {
            return Ok(Cond::Not(Box::new(self.unary()?)));
        }
        if self.eat_kw("true") {
            return Ok(Cond::Bool(true));
        }
        if self.eat_kw("false") {
            return Ok(Cond::Bool(false));
        }
        if self.at_sym("(") {
            // Either a parenthesised condition or an expression starting with `(`.
            let save = self.pos;
            self.pos += 1;
            if let Ok(c) = self.cond() {
                if self.eat_sym(")") && !self.at_cmp() {
                    return Ok(c);
                }
            }
            self.pos = save;
        }
        let lhs = self.expr()?;
        let op = match self.peek() {
            Some(Tok::Sym("<")) => CmpOp::Lt,
            Some(Tok::Sym("<=")) => CmpOp::Le,
            Some(Tok::Sym(">")) => CmpOp::Gt,
            Some(Tok::Sym(">=")) => CmpOp::Ge,
            Some(Tok::Sym("==")) => CmpOp::Eq,
            Some(Tok::Sym("=")) if self.pragma => CmpOp::Eq,
            Some(Tok::Sym("!=")) => CmpOp::Ne,
            _ => return self.err(format!("expected comparison, found {}", self.describe())),
        };
        self.pos += 1;
        let rhs = self.expr()?;
        Ok(Cond::Cmp(AtomicConstraint::new(&lhs, op, &rhs)))
    }

    fn at_cmp(&self) -> bool {
        ["<", "<=", ">", ">=", "==", "!=", "+", "-", "*", "/", "%"].iter().any(|s| self.at_sym(s))
            || (self.pragma && self.at_sym("="))
    }

    fn expr(&mut self) -> R<LinearTerm> {
        let mut t = self.product()?;
        loop {
            if self.eat_sym("+") {
                t = t.plus(&self.product()?);
            } else if self.eat_sym("-") {
                t = t.minus(&self.product()?);
            } else {
                return Ok(t);
            }
        }
    }

    fn product(&mut self) -> R<LinearTerm> {
        let mut t = self.factor()?;
        loop {
            let line = self.line();
            if self.eat_sym("*") {
                let u = self.factor()?;
                t = match (t.as_constant(), u.as_constant()) {
                    (Some(k), _) => u.scaled(k),
                    (_, Some(k)) => t.scaled(k),
                    _ => return Err(ImpError::NonLinear { line }),
                };
            } else if self.at_sym("/") || self.at_sym("%") {
                return Err(ImpError::NonLinear { line });
            } else {
                return Ok(t);
            }
        }
    }

    fn factor(&mut self) -> R<LinearTerm> {
        match self.peek().cloned() {
            Some(Tok::Num(n)) => {
                self.pos += 1;
                Ok(LinearTerm::constant(rat(n)))
            }
            Some(Tok::Sym("-")) => {
                self.pos += 1;
                Ok(self.factor()?.negated())
            }
            Some(Tok::Sym("(")) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect_sym(")")?;
                Ok(e)
            }
            Some(Tok::Ident(_)) => Ok(LinearTerm::var(Var::new(&self.variable()?))),
            _ => self.err(format!("expected expression, found {}", self.describe())),
        }
    }
}

fn pragma_parser(text: &str, line: usize) -> R<Parser> {
    let lexed = lex(text).map_err(|e| relocate(e, line))?;
    let toks = lexed.toks.into_iter().map(|(t, _)| (t, line)).collect();
    let mut p = Parser::new(toks);
    p.pragma = true;
    Ok(p)
}

fn relocate(e: ImpError, line: usize) -> ImpError {
    match e {
        ImpError::Syntax { msg, .. } => ImpError::Syntax { line, msg },
        ImpError::NonLinear { .. } => ImpError::NonLinear { line },
        other => other,
    }
}

fn pragma_constraint(text: &str, line: usize, what: &'static str) -> R<LinearConstraint> {
    let mut p = pragma_parser(text, line)?;
    let c = p.cond()?;
    if p.peek().is_some() {
        return p.err(format!("unexpected {} in {what}", p.describe()));
    }
    c.as_conjunction().ok_or(ImpError::NotConjunctive(what))
}

fn pragma_entry(text: &str, line: usize) -> R<Entry> {
    let mut p = pragma_parser(text, line)?;
    let var = p.ident()?;
    p.expect_sym("=")?;
    let func = p.ident()?;
    let args = p.args()?;
    p.eat_sym(";");
    if p.peek().is_some() {
        return p.err(format!("unexpected {} after entry call", p.describe()));
    }
    Ok(Entry { var, func, args })
}

/// Parses functions and the triple given by pragma comments. Missing `pre`
/// and `post` default to `true`; each `entry` pragma adds a call, run in
/// order.
pub fn parse_imp(text: &str) -> Result<(ImpProgram, TripleSpec), ImpError> {
    let lexed = lex(text)?;
    let mut p = Parser::new(lexed.toks);
    let mut prog = ImpProgram::default();
    let mut calls = Vec::new();
    while p.peek().is_some() {
        let (f, c) = p.function()?;
        if prog.function(&f.name).is_some() {
            return Err(ImpError::DuplicateFunction(f.name));
        }
        prog.functions.push(f);
        calls.extend(c);
    }
    let mut spec = TripleSpec::default();
    for (kind, body, line) in &lexed.pragmas {
        match kind {
            PragmaKind::Pre => spec.pre.extend(&pragma_constraint(body, *line, "precondition")?),
            PragmaKind::Post => spec.post.extend(&pragma_constraint(body, *line, "postcondition")?),
            PragmaKind::Entry => {
                let e = pragma_entry(body, *line)?;
                calls.push((e.func.clone(), e.args.len(), *line));
                spec.entries.push(e);
            }
        }
    }
    for (name, n, line) in calls {
        let f = prog.function(&name).ok_or_else(|| ImpError::UnknownFunction { line, name: name.clone() })?;
        if f.params.len() != n {
            return Err(ImpError::Arity { line, name, expected: f.params.len(), found: n });
        }
    }
    Ok((prog, spec))
}
