//! Hand-rolled lexer and recursive-descent parser for the formula grammar.
//!
//! ```text
//! formula := ("forall"|"exists") ident+ "." formula | or
//! or      := and ("|" and)*
//! and     := unit ("&" unit)*
//! unit    := "(" formula ")" | "!" atom | "!" "(" atom ")" | atom
//!          | atom "->" unit | "(" atom ("&" atom)* ")" "->" unit
//! atom    := "=(" term ("," term)* ")" | term "=" term | ident "(" term* ")"
//! term    := ident | "0" | "max" | ident "(" term ("," term)* ")"
//! ```
//!
//! `A -> B` is sugar for `!A | B`; a parenthesized antecedent must be a
//! conjunction of positive atoms and every atom is negated individually.
//! Comments run from `#` to end of line. Negation is pushed into literals
//! here, so the resulting tree is in negation normal form by construction.

use super::{Atom, Formula, Term, MAX, SUCC};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("parse error at line {line}, column {col}: {msg}")]
pub struct ParseError {
    pub line: u32,
    pub col: u32,
    pub msg: String,
}

impl ParseError {
    fn new(line: u32, col: u32, msg: impl Into<String>) -> ParseError {
        ParseError { line, col, msg: msg.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Forall,
    Exists,
    /// Header keyword of the second-order surface syntax.
    ExistsRel,
    Ident(String),
    /// Numeric literal; only `0` is a valid term, arities may be larger.
    Num(u64),
    Dot,
    Comma,
    Slash,
    LParen,
    RParen,
    Amp,
    Pipe,
    Bang,
    Arrow,
    Eq,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Forall => "'forall'".into(),
            Tok::Exists => "'exists'".into(),
            Tok::ExistsRel => "'exists-rel'".into(),
            Tok::Ident(s) => format!("identifier '{s}'"),
            Tok::Num(n) => format!("number '{n}'"),
            Tok::Dot => "'.'".into(),
            Tok::Comma => "','".into(),
            Tok::Slash => "'/'".into(),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::Amp => "'&'".into(),
            Tok::Pipe => "'|'".into(),
            Tok::Bang => "'!'".into(),
            Tok::Arrow => "'->'".into(),
            Tok::Eq => "'='".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct SpannedTok {
    pub tok: Tok,
    pub line: u32,
    pub col: u32,
}

pub(crate) fn lex(text: &str) -> Result<Vec<SpannedTok>, ParseError> {
    let mut toks = Vec::new();
    let mut chars = text.chars().peekable();
    let mut line: u32 = 1;
    let mut col: u32 = 1;

    macro_rules! push {
        ($t:expr, $l:expr, $c:expr) => {
            toks.push(SpannedTok { tok: $t, line: $l, col: $c })
        };
    }

    while let Some(&c) = chars.peek() {
        let (tl, tc) = (line, col);
        match c {
            '\n' => {
                chars.next();
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                chars.next();
                col += 1;
            }
            '#' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    chars.next();
                    col += 1;
                }
            }
            '(' => {
                chars.next();
                col += 1;
                push!(Tok::LParen, tl, tc);
            }
            ')' => {
                chars.next();
                col += 1;
                push!(Tok::RParen, tl, tc);
            }
            ',' => {
                chars.next();
                col += 1;
                push!(Tok::Comma, tl, tc);
            }
            '.' => {
                chars.next();
                col += 1;
                push!(Tok::Dot, tl, tc);
            }
            '/' => {
                chars.next();
                col += 1;
                push!(Tok::Slash, tl, tc);
            }
            '&' => {
                chars.next();
                col += 1;
                push!(Tok::Amp, tl, tc);
            }
            '|' => {
                chars.next();
                col += 1;
                push!(Tok::Pipe, tl, tc);
            }
            '!' => {
                chars.next();
                col += 1;
                push!(Tok::Bang, tl, tc);
            }
            '=' => {
                chars.next();
                col += 1;
                push!(Tok::Eq, tl, tc);
            }
            '-' => {
                chars.next();
                col += 1;
                match chars.peek() {
                    Some('>') => {
                        chars.next();
                        col += 1;
                        push!(Tok::Arrow, tl, tc);
                    }
                    _ => return Err(ParseError::new(tl, tc, "expected '->' after '-'")),
                }
            }
            c if c.is_ascii_digit() => {
                let mut s = String::new();
                while let Some(&d) = chars.peek() {
                    if d.is_ascii_digit() {
                        s.push(d);
                        chars.next();
                        col += 1;
                    } else {
                        break;
                    }
                }
                if matches!(chars.peek(), Some(d) if d.is_alphanumeric() || *d == '_') {
                    return Err(ParseError::new(tl, tc, "identifiers may not start with a digit"));
                }
                let n: u64 = s
                    .parse()
                    .map_err(|_| ParseError::new(tl, tc, format!("number '{s}' is too large")))?;
                push!(Tok::Num(n), tl, tc);
            }
            c if c.is_alphabetic() || c == '_' => {
                let mut s = String::new();
                while let Some(&d) = chars.peek() {
                    if d.is_alphanumeric() || d == '_' {
                        s.push(d);
                        chars.next();
                        col += 1;
                    } else {
                        break;
                    }
                }
                match s.as_str() {
                    "forall" => push!(Tok::Forall, tl, tc),
                    "exists" => {
                        // "exists-rel" is one keyword; plain "exists" followed
                        // by '-' would otherwise always be a lex error at '-'.
                        let mut look = chars.clone();
                        if look.next() == Some('-')
                            && look.next() == Some('r')
                            && look.next() == Some('e')
                            && look.next() == Some('l')
                            && !matches!(look.peek(), Some(d) if d.is_alphanumeric() || *d == '_')
                        {
                            for _ in 0..4 {
                                chars.next();
                            }
                            col += 4;
                            push!(Tok::ExistsRel, tl, tc);
                        } else {
                            push!(Tok::Exists, tl, tc);
                        }
                    }
                    _ => push!(Tok::Ident(s), tl, tc),
                }
            }
            other => {
                return Err(ParseError::new(tl, tc, format!("unexpected character '{other}'")));
            }
        }
    }
    push!(Tok::Eof, line, col);
    Ok(toks)
}

/// Recursion guard; hostile inputs otherwise overflow the stack.
const MAX_DEPTH: u32 = 512;

pub(crate) struct Parser {
    toks: Vec<SpannedTok>,
    pos: usize,
    depth: u32,
    rel_arity: std::collections::HashMap<String, usize>,
    func_arity: std::collections::HashMap<String, usize>,
}

impl Parser {
    pub(crate) fn new(toks: Vec<SpannedTok>) -> Parser {
        Parser {
            toks,
            pos: 0,
            depth: 0,
            rel_arity: Default::default(),
            func_arity: Default::default(),
        }
    }

    fn peek(&self) -> &SpannedTok {
        &self.toks[self.pos.min(self.toks.len() - 1)]
    }

    fn next(&mut self) -> SpannedTok {
        let t = self.toks[self.pos.min(self.toks.len() - 1)].clone();
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn err_here(&self, msg: impl Into<String>) -> ParseError {
        let t = self.peek();
        ParseError::new(t.line, t.col, msg)
    }

    fn expect(&mut self, tok: Tok) -> Result<SpannedTok, ParseError> {
        if self.peek().tok == tok {
            Ok(self.next())
        } else {
            Err(self.err_here(format!(
                "expected {}, found {}",
                tok.describe(),
                self.peek().tok.describe()
            )))
        }
    }

    fn enter(&mut self) -> Result<(), ParseError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(self.err_here("formula nests too deeply"));
        }
        Ok(())
    }

    fn leave(&mut self) {
        self.depth -= 1;
    }

    pub(crate) fn at_eof(&self) -> bool {
        self.peek().tok == Tok::Eof
    }

    pub(crate) fn expect_eof(&self) -> Result<(), ParseError> {
        if self.at_eof() {
            Ok(())
        } else {
            Err(self
                .err_here(format!("expected end of input, found {}", self.peek().tok.describe())))
        }
    }

    pub(crate) fn formula(&mut self) -> Result<Formula, ParseError> {
        self.enter()?;
        let out = match self.peek().tok {
            Tok::Forall | Tok::Exists => {
                let quant = self.next().tok;
                let mut vars = Vec::new();
                loop {
                    match &self.peek().tok {
                        Tok::Ident(name) => {
                            if name == MAX {
                                return Err(self
                                    .err_here("'max' is a reserved constant and cannot be bound"));
                            }
                            vars.push(name.clone());
                            self.next();
                        }
                        Tok::Num(_) => {
                            return Err(self.err_here("quantified variables must be identifiers"));
                        }
                        _ if vars.is_empty() => {
                            return Err(
                                self.err_here("expected at least one variable after quantifier")
                            );
                        }
                        _ => break,
                    }
                }
                self.expect(Tok::Dot)?;
                let body = self.formula()?;
                let wrap = match quant {
                    Tok::Forall => Formula::forall,
                    _ => Formula::exists,
                };
                Ok(vars.into_iter().rev().fold(body, |acc, v| wrap(v, acc)))
            }
            _ => self.or_expr(),
        };
        self.leave();
        out
    }

    fn or_expr(&mut self) -> Result<Formula, ParseError> {
        let mut left = self.and_expr()?;
        while self.peek().tok == Tok::Pipe {
            self.next();
            let right = self.and_expr()?;
            left = Formula::or(left, right);
        }
        Ok(left)
    }

    fn and_expr(&mut self) -> Result<Formula, ParseError> {
        let mut left = self.unit()?;
        while self.peek().tok == Tok::Amp {
            self.next();
            let right = self.unit()?;
            left = Formula::and(left, right);
        }
        Ok(left)
    }

    fn unit(&mut self) -> Result<Formula, ParseError> {
        self.enter()?;
        let out = self.unit_inner();
        self.leave();
        out
    }

    fn unit_inner(&mut self) -> Result<Formula, ParseError> {
        match self.peek().tok {
            Tok::Bang => {
                self.next();
                let parens = self.peek().tok == Tok::LParen;
                if parens {
                    self.next();
                }
                let atom = self.atom()?;
                if parens {
                    self.expect(Tok::RParen)?;
                }
                if self.peek().tok == Tok::Arrow {
                    return Err(self.err_here("the left side of '->' must be positive atoms"));
                }
                Ok(Formula::nlit(atom))
            }
            Tok::LParen => {
                self.next();
                let inner = self.formula()?;
                self.expect(Tok::RParen)?;
                if self.peek().tok == Tok::Arrow {
                    let arrow = self.next();
                    let mut antecedents = Vec::new();
                    for part in inner.conjuncts() {
                        match part {
                            Formula::Lit(l) if l.positive => antecedents.push(l.atom.clone()),
                            _ => {
                                return Err(ParseError::new(
                                    arrow.line,
                                    arrow.col,
                                    "the left side of '->' must be a conjunction of positive atoms",
                                ))
                            }
                        }
                    }
                    let rhs = self.unit()?;
                    Ok(desugar_implication(antecedents, rhs))
                } else {
                    Ok(inner)
                }
            }
            _ => {
                let atom = self.atom()?;
                if self.peek().tok == Tok::Arrow {
                    self.next();
                    let rhs = self.unit()?;
                    Ok(desugar_implication(vec![atom], rhs))
                } else {
                    Ok(Formula::lit(atom))
                }
            }
        }
    }

    pub(crate) fn atom(&mut self) -> Result<Atom, ParseError> {
        if self.peek().tok == Tok::Eq {
            // Dependence atom: =(t1, .., tn).
            self.next();
            self.expect(Tok::LParen)?;
            let mut terms = vec![self.term()?];
            while self.peek().tok == Tok::Comma {
                self.next();
                terms.push(self.term()?);
            }
            self.expect(Tok::RParen)?;
            let determined = terms.pop().expect("at least one term parsed");
            return Ok(Atom::Dep(terms, determined));
        }
        let at = self.peek().clone();
        let t = self.term_unclassified()?;
        if self.peek().tok == Tok::Eq {
            self.next();
            if let Term::App(name, args) = &t {
                self.record_func(name, args.len(), &at)?;
            }
            let r = self.term()?;
            Ok(Atom::Eq(t, r))
        } else {
            match t {
                Term::App(name, args) => {
                    // Without a following '=', an application is a relation atom.
                    self.record_rel(&name, args.len(), &at)?;
                    Ok(Atom::Rel(name, args))
                }
                _ => Err(self.err_here("expected '=' after term")),
            }
        }
    }

    fn record_rel(&mut self, name: &str, arity: usize, at: &SpannedTok) -> Result<(), ParseError> {
        if name == SUCC && arity != 2 {
            return Err(ParseError::new(at.line, at.col, "'succ' is a binary relation"));
        }
        if self.func_arity.contains_key(name) {
            return Err(ParseError::new(
                at.line,
                at.col,
                format!("'{name}' is used both as a relation and as a function"),
            ));
        }
        match self.rel_arity.get(name) {
            Some(&a) if a != arity => Err(ParseError::new(
                at.line,
                at.col,
                format!("relation '{name}' used with arity {arity} but earlier with arity {a}"),
            )),
            _ => {
                self.rel_arity.insert(name.to_string(), arity);
                Ok(())
            }
        }
    }

    pub(crate) fn term(&mut self) -> Result<Term, ParseError> {
        let at = self.peek().clone();
        let t = self.term_unclassified()?;
        if let Term::App(name, args) = &t {
            self.record_func(name, args.len(), &at)?;
        }
        Ok(t)
    }

    /// Parses one term but defers the function-vs-relation classification of
    /// a top-level application to the caller; nested arguments are always
    /// function applications and are recorded as such.
    fn term_unclassified(&mut self) -> Result<Term, ParseError> {
        let at = self.peek().clone();
        match self.next().tok {
            Tok::Num(0) => Ok(Term::zero()),
            Tok::Num(n) => Err(ParseError::new(
                at.line,
                at.col,
                format!("'{n}' is not a term; only the constant 0 exists, use succ to reach other elements"),
            )),
            Tok::Ident(name) => {
                if name == MAX {
                    if self.peek().tok == Tok::LParen {
                        return Err(self.err_here("'max' is a constant and cannot be applied"));
                    }
                    return Ok(Term::max());
                }
                if self.peek().tok == Tok::LParen {
                    self.next();
                    let mut args = Vec::new();
                    if self.peek().tok != Tok::RParen {
                        args.push(self.term()?);
                        while self.peek().tok == Tok::Comma {
                            self.next();
                            args.push(self.term()?);
                        }
                    }
                    self.expect(Tok::RParen)?;
                    Ok(Term::App(name, args))
                } else {
                    Ok(Term::Var(name))
                }
            }
            other => Err(ParseError::new(
                at.line,
                at.col,
                format!("expected a term, found {}", other.describe()),
            )),
        }
    }

    fn record_func(&mut self, name: &str, arity: usize, at: &SpannedTok) -> Result<(), ParseError> {
        if name == SUCC {
            return Err(ParseError::new(
                at.line,
                at.col,
                "'succ' is a relation, not a function; write succ(x, y) as an atom",
            ));
        }
        if self.rel_arity.contains_key(name) {
            return Err(ParseError::new(
                at.line,
                at.col,
                format!("'{name}' is used both as a relation and as a function"),
            ));
        }
        match self.func_arity.get(name) {
            Some(&a) if a != arity => Err(ParseError::new(
                at.line,
                at.col,
                format!("function '{name}' used with arity {arity} but earlier with arity {a}"),
            )),
            _ => {
                self.func_arity.insert(name.to_string(), arity);
                Ok(())
            }
        }
    }
}

fn desugar_implication(antecedents: Vec<Atom>, rhs: Formula) -> Formula {
    let mut acc: Option<Formula> = None;
    for a in antecedents {
        let lit = Formula::nlit(a);
        acc = Some(match acc {
            None => lit,
            Some(f) => Formula::or(f, lit),
        });
    }
    match acc {
        None => rhs,
        Some(f) => Formula::or(f, rhs),
    }
}

/// Parses a formula from text. See the module header for the grammar.
pub fn parse_formula(text: &str) -> Result<Formula, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser::new(toks);
    let f = p.formula()?;
    p.expect_eof()?;
    Ok(f)
}
