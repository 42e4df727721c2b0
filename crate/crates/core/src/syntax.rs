//! Signatures, first-order formulas over a relational signature, and the
//! concrete ASCII grammar used by every text input.
//!
//! ```text
//! formula  := "forall" var body | "exists" var body | "~" formula
//!           | "(" formula bin formula ")" | atom
//! body     := "(" formula ")"
//! bin      := "&" | "|" | "->"
//! atom     := name "(" var { "," var } ")" | var "=" var
//! ```
//!
//! A quantifier body may also carry a single binary connective directly,
//! so `forall x (R(x) & S(x))` reads as `forall x ((R(x) & S(x)))`.
//! [`render`] always emits the fully parenthesized form.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

/// Relation and function symbols with their arities.
///
/// Function symbols of arity zero are constant symbols. Formulas only ever
/// mention relation symbols; function symbols exist so that structures
/// carrying partial functions can be relationalized.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Signature {
    relations: BTreeMap<String, usize>,
    functions: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SignatureError {
    #[error("relation symbol `{0}` must have arity at least 1")]
    ZeroArity(String),
    #[error("symbol `{0}` is declared both as a relation and as a function")]
    NotDisjoint(String),
    #[error("symbol `{0}` is declared twice")]
    Duplicate(String),
    #[error("`{0}` is not a valid symbol name")]
    BadName(String),
}

impl Signature {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a purely relational signature.
    pub fn relational<S: Into<String>>(
        relations: impl IntoIterator<Item = (S, usize)>,
    ) -> Result<Self, SignatureError> {
        let mut sig = Self::new();
        for (name, arity) in relations {
            sig.add_relation(name, arity)?;
        }
        Ok(sig)
    }

    pub fn add_relation(
        &mut self,
        name: impl Into<String>,
        arity: usize,
    ) -> Result<(), SignatureError> {
        let name = name.into();
        if !is_symbol_name(&name) {
            return Err(SignatureError::BadName(name));
        }
        if arity == 0 {
            return Err(SignatureError::ZeroArity(name));
        }
        if self.functions.contains_key(&name) {
            return Err(SignatureError::NotDisjoint(name));
        }
        if self.relations.insert(name.clone(), arity).is_some() {
            return Err(SignatureError::Duplicate(name));
        }
        Ok(())
    }

    /// Adds a function symbol; arity 0 declares a constant symbol.
    pub fn add_function(
        &mut self,
        name: impl Into<String>,
        arity: usize,
    ) -> Result<(), SignatureError> {
        let name = name.into();
        if !is_symbol_name(&name) {
            return Err(SignatureError::BadName(name));
        }
        if self.relations.contains_key(&name) {
            return Err(SignatureError::NotDisjoint(name));
        }
        if self.functions.insert(name.clone(), arity).is_some() {
            return Err(SignatureError::Duplicate(name));
        }
        Ok(())
    }

    pub fn relation_arity(&self, name: &str) -> Option<usize> {
        self.relations.get(name).copied()
    }

    pub fn function_arity(&self, name: &str) -> Option<usize> {
        self.functions.get(name).copied()
    }

    pub fn relations(&self) -> impl Iterator<Item = (&str, usize)> {
        self.relations.iter().map(|(k, &v)| (k.as_str(), v))
    }

    pub fn functions(&self) -> impl Iterator<Item = (&str, usize)> {
        self.functions.iter().map(|(k, &v)| (k.as_str(), v))
    }

    pub fn constants(&self) -> impl Iterator<Item = &str> {
        self.functions
            .iter()
            .filter(|(_, &a)| a == 0)
            .map(|(k, _)| k.as_str())
    }

    pub fn is_relational(&self) -> bool {
        self.functions.is_empty()
    }

    /// The relation-symbol part of the signature.
    pub fn relational_part(&self) -> Signature {
        Signature {
            relations: self.relations.clone(),
            functions: BTreeMap::new(),
        }
    }
}

impl fmt::Display for Signature {
    /// `R/1, S/2; f/1, c/0` form.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rels: Vec<String> = self
            .relations
            .iter()
            .map(|(n, a)| format!("{n}/{a}"))
            .collect();
        write!(f, "{}", rels.join(", "))?;
        if !self.functions.is_empty() {
            let funs: Vec<String> = self
                .functions
                .iter()
                .map(|(n, a)| format!("{n}/{a}"))
                .collect();
            write!(f, "; {}", funs.join(", "))?;
        }
        Ok(())
    }
}

/// Symbol names: ASCII letter or `_`, then letters, digits, `_`.
pub fn is_symbol_name(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_') && !is_keyword(s)
}

/// Variable names: a lowercase ASCII letter followed by ASCII alphanumerics.
pub fn is_variable_name(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_lowercase() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric()) && !is_keyword(s)
}

fn is_keyword(s: &str) -> bool {
    s == "forall" || s == "exists"
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Pred(String, Vec<String>),
    Eq(String, String),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Forall(String, Box<Formula>),
    Exists(String, Box<Formula>),
}

impl Formula {
    pub fn pred<S: Into<String>>(
        sym: impl Into<String>,
        vars: impl IntoIterator<Item = S>,
    ) -> Self {
        Formula::Pred(sym.into(), vars.into_iter().map(Into::into).collect())
    }

    pub fn eq(a: impl Into<String>, b: impl Into<String>) -> Self {
        Formula::Eq(a.into(), b.into())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Self {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn forall(v: impl Into<String>, f: Formula) -> Self {
        Formula::Forall(v.into(), Box::new(f))
    }

    pub fn exists(v: impl Into<String>, f: Formula) -> Self {
        Formula::Exists(v.into(), Box::new(f))
    }

    /// Nesting depth; atoms have depth 0.
    pub fn depth(&self) -> usize {
        match self {
            Formula::Pred(..) | Formula::Eq(..) => 0,
            Formula::Not(f) | Formula::Forall(_, f) | Formula::Exists(_, f) => 1 + f.depth(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                1 + a.depth().max(b.depth())
            }
        }
    }

    pub fn is_sentence(&self) -> bool {
        free_variables(self).is_empty()
    }

    /// Checks every predicate against `sig`.
    pub fn check_signature(&self, sig: &Signature) -> Result<(), ParseError> {
        match self {
            Formula::Pred(sym, vars) => match sig.relation_arity(sym) {
                None => Err(ParseError::UnknownSymbol {
                    symbol: sym.clone(),
                    pos: 0,
                }),
                Some(a) if a != vars.len() => Err(ParseError::ArityMismatch {
                    symbol: sym.clone(),
                    expected: a,
                    found: vars.len(),
                    pos: 0,
                }),
                Some(_) => Ok(()),
            },
            Formula::Eq(..) => Ok(()),
            Formula::Not(f) | Formula::Forall(_, f) | Formula::Exists(_, f) => {
                f.check_signature(sig)
            }
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.check_signature(sig)?;
                b.check_signature(sig)
            }
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render(self))
    }
}

pub fn free_variables(f: &Formula) -> BTreeSet<String> {
    fn go<'a>(f: &'a Formula, bound: &mut Vec<&'a str>, out: &mut BTreeSet<String>) {
        let mut note = |v: &'a str, bound: &Vec<&'a str>| {
            if !bound.contains(&v) {
                out.insert(v.to_string());
            }
        };
        match f {
            Formula::Pred(_, vars) => {
                for v in vars {
                    note(v, bound);
                }
            }
            Formula::Eq(a, b) => {
                note(a, bound);
                note(b, bound);
            }
            Formula::Not(g) => go(g, bound, out),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                go(a, bound, out);
                go(b, bound, out);
            }
            Formula::Forall(v, g) | Formula::Exists(v, g) => {
                bound.push(v);
                go(g, bound, out);
                bound.pop();
            }
        }
    }
    let mut out = BTreeSet::new();
    go(f, &mut Vec::new(), &mut out);
    out
}

pub fn render(f: &Formula) -> String {
    let mut out = String::new();
    render_into(f, &mut out);
    out
}

fn render_into(f: &Formula, out: &mut String) {
    match f {
        Formula::Pred(sym, vars) => {
            out.push_str(sym);
            out.push('(');
            out.push_str(&vars.join(","));
            out.push(')');
        }
        Formula::Eq(a, b) => {
            out.push_str(a);
            out.push_str(" = ");
            out.push_str(b);
        }
        Formula::Not(g) => {
            out.push('~');
            render_into(g, out);
        }
        Formula::And(a, b) => render_binary(a, "&", b, out),
        Formula::Or(a, b) => render_binary(a, "|", b, out),
        Formula::Implies(a, b) => render_binary(a, "->", b, out),
        Formula::Forall(v, g) => render_quant("forall", v, g, out),
        Formula::Exists(v, g) => render_quant("exists", v, g, out),
    }
}

fn render_binary(a: &Formula, op: &str, b: &Formula, out: &mut String) {
    out.push('(');
    render_into(a, out);
    out.push(' ');
    out.push_str(op);
    out.push(' ');
    render_into(b, out);
    out.push(')');
}

fn render_quant(q: &str, v: &str, body: &Formula, out: &mut String) {
    out.push_str(q);
    out.push(' ');
    out.push_str(v);
    out.push_str(" (");
    render_into(body, out);
    out.push(')');
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at byte {pos}: {message}")]
    Syntax { pos: usize, message: String },
    #[error("unknown relation symbol `{symbol}` at byte {pos}")]
    UnknownSymbol { symbol: String, pos: usize },
    #[error("relation `{symbol}` has arity {expected} but is applied to {found} argument(s) at byte {pos}")]
    ArityMismatch {
        symbol: String,
        expected: usize,
        found: usize,
        pos: usize,
    },
}

/// Parses `text` and checks every predicate against `sig`.
pub fn parse_formula(text: &str, sig: &Signature) -> Result<Formula, ParseError> {
    let mut parser = Parser::new(text, Arities::Fixed(sig))?;
    parser.parse_complete()
}

/// Parses a closed formula; open formulas are a syntax error.
pub fn parse_sentence(text: &str, sig: &Signature) -> Result<Formula, ParseError> {
    let f = parse_formula(text, sig)?;
    if let Some(v) = free_variables(&f).into_iter().next() {
        return Err(ParseError::Syntax {
            pos: 0,
            message: format!("expected a sentence but variable `{v}` is free"),
        });
    }
    Ok(f)
}

/// Infers a relational signature from the predicates used in `texts`.
///
/// The first occurrence of a symbol fixes its arity; later occurrences with
/// a different argument count are arity mismatches.
pub fn infer_signature<'a>(
    texts: impl IntoIterator<Item = &'a str>,
) -> Result<Signature, ParseError> {
    let mut seen = BTreeMap::new();
    for text in texts {
        let mut parser = Parser::new(text, Arities::Inferred(&mut seen))?;
        parser.parse_complete()?;
    }
    let mut sig = Signature::new();
    for (name, arity) in seen {
        sig.add_relation(name, arity)
            .map_err(|e| ParseError::Syntax {
                pos: 0,
                message: e.to_string(),
            })?;
    }
    Ok(sig)
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    LParen,
    RParen,
    Comma,
    Tilde,
    Amp,
    Bar,
    Arrow,
    EqSign,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Tilde => f.write_str("`~`"),
            Tok::Amp => f.write_str("`&`"),
            Tok::Bar => f.write_str("`|`"),
            Tok::Arrow => f.write_str("`->`"),
            Tok::EqSign => f.write_str("`=`"),
        }
    }
}

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let tok = match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b',' => Tok::Comma,
            b'~' => Tok::Tilde,
            b'&' => Tok::Amp,
            b'|' => Tok::Bar,
            b'=' => Tok::EqSign,
            b'-' => {
                if bytes.get(i + 1) == Some(&b'>') {
                    i += 1;
                    Tok::Arrow
                } else {
                    return Err(ParseError::Syntax {
                        pos: i,
                        message: "expected `->`".into(),
                    });
                }
            }
            c if c.is_ascii_alphanumeric() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                toks.push((Tok::Ident(text[start..i].to_string()), start));
                continue;
            }
            _ => {
                let ch = text[i..].chars().next().unwrap_or('?');
                return Err(ParseError::Syntax {
                    pos: i,
                    message: format!("unexpected character `{ch}`"),
                });
            }
        };
        i += 1;
        toks.push((tok, start));
    }
    Ok(toks)
}

enum Arities<'a> {
    Fixed(&'a Signature),
    Inferred(&'a mut BTreeMap<String, usize>),
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    at: usize,
    end: usize,
    arities: Arities<'a>,
}

impl<'a> Parser<'a> {
    fn new(text: &str, arities: Arities<'a>) -> Result<Self, ParseError> {
        Ok(Parser {
            toks: tokenize(text)?,
            at: 0,
            end: text.len(),
            arities,
        })
    }

    fn parse_complete(&mut self) -> Result<Formula, ParseError> {
        let f = self.formula()?;
        if let Some((tok, pos)) = self.toks.get(self.at) {
            return Err(ParseError::Syntax {
                pos: *pos,
                message: format!("unexpected {tok} after end of formula"),
            });
        }
        Ok(f)
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(t, _)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map_or(self.end, |(_, p)| *p)
    }

    fn next(&mut self) -> Option<(Tok, usize)> {
        let t = self.toks.get(self.at).cloned();
        if t.is_some() {
            self.at += 1;
        }
        t
    }

    fn unexpected(&self, wanted: &str) -> ParseError {
        let message = match self.peek() {
            Some(t) => format!("expected {wanted}, found {t}"),
            None => format!("expected {wanted}, found end of input"),
        };
        ParseError::Syntax {
            pos: self.pos(),
            message,
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<(), ParseError> {
        if self.peek() == Some(&tok) {
            self.at += 1;
            Ok(())
        } else {
            Err(self.unexpected(&tok.to_string()))
        }
    }

    fn variable(&mut self) -> Result<String, ParseError> {
        match self.peek() {
            Some(Tok::Ident(s)) if is_variable_name(s) => {
                let s = s.clone();
                self.at += 1;
                Ok(s)
            }
            _ => Err(self.unexpected("a variable")),
        }
    }

    fn binop(&mut self) -> Option<fn(Formula, Formula) -> Formula> {
        let op: fn(Formula, Formula) -> Formula = match self.peek()? {
            Tok::Amp => Formula::and,
            Tok::Bar => Formula::or,
            Tok::Arrow => Formula::implies,
            _ => return None,
        };
        self.at += 1;
        Some(op)
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        match self.peek() {
            Some(Tok::Tilde) => {
                self.at += 1;
                Ok(Formula::not(self.formula()?))
            }
            Some(Tok::LParen) => {
                self.at += 1;
                let lhs = self.formula()?;
                let op = self
                    .binop()
                    .ok_or_else(|| self.unexpected("`&`, `|` or `->`"))?;
                let rhs = self.formula()?;
                self.expect(Tok::RParen)?;
                Ok(op(lhs, rhs))
            }
            Some(Tok::Ident(s)) if s == "forall" || s == "exists" => {
                let universal = s == "forall";
                self.at += 1;
                let v = self.variable()?;
                let body = self.body()?;
                Ok(if universal {
                    Formula::forall(v, body)
                } else {
                    Formula::exists(v, body)
                })
            }
            Some(Tok::Ident(_)) => self.atom(),
            _ => Err(self.unexpected("a formula")),
        }
    }

    fn body(&mut self) -> Result<Formula, ParseError> {
        self.expect(Tok::LParen)?;
        let mut f = self.formula()?;
        if let Some(op) = self.binop() {
            let rhs = self.formula()?;
            f = op(f, rhs);
        }
        self.expect(Tok::RParen)?;
        Ok(f)
    }

    fn atom(&mut self) -> Result<Formula, ParseError> {
        let (name, pos) = match self.next() {
            Some((Tok::Ident(s), p)) => (s, p),
            _ => unreachable!("atom called on non-identifier"),
        };
        match self.peek() {
            Some(Tok::LParen) => {
                self.at += 1;
                let mut vars = vec![self.variable()?];
                while self.peek() == Some(&Tok::Comma) {
                    self.at += 1;
                    vars.push(self.variable()?);
                }
                self.expect(Tok::RParen)?;
                self.check_arity(&name, vars.len(), pos)?;
                Ok(Formula::Pred(name, vars))
            }
            Some(Tok::EqSign) => {
                if !is_variable_name(&name) {
                    return Err(ParseError::Syntax {
                        pos,
                        message: format!("`{name}` is not a variable"),
                    });
                }
                self.at += 1;
                let rhs = self.variable()?;
                Ok(Formula::Eq(name, rhs))
            }
            _ => Err(self.unexpected("`(` or `=`")),
        }
    }

    fn check_arity(&mut self, name: &str, found: usize, pos: usize) -> Result<(), ParseError> {
        if !is_symbol_name(name) {
            return Err(ParseError::Syntax {
                pos,
                message: format!("`{name}` is not a relation symbol"),
            });
        }
        let expected = match &mut self.arities {
            Arities::Fixed(sig) => sig.relation_arity(name),
            Arities::Inferred(seen) => Some(*seen.entry(name.to_string()).or_insert(found)),
        };
        match expected {
            None => Err(ParseError::UnknownSymbol {
                symbol: name.to_string(),
                pos,
            }),
            Some(e) if e != found => Err(ParseError::ArityMismatch {
                symbol: name.to_string(),
                expected: e,
                found,
                pos,
            }),
            Some(_) => Ok(()),
        }
    }
}
