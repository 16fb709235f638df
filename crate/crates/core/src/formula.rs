//! Syntax of the epistemic language with distributed knowledge.
//!
//! Only the primitive connectives are represented in the tree: the truth
//! constant, atoms, negation, disjunction, individual knowledge `[a]` and
//! group distributed knowledge `D{..}`. Conjunction, implication,
//! equivalence, diamonds and `false` are expanded by the parser.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// A non-empty set of agent names.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Group(BTreeSet<String>);

impl Group {
    pub fn new<I, S>(agents: I) -> Result<Self, FormulaError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let set: BTreeSet<String> = agents.into_iter().map(Into::into).collect();
        if set.is_empty() {
            return Err(FormulaError::EmptyGroup);
        }
        Ok(Group(set))
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, agent: &str) -> bool {
        self.0.contains(agent)
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, "}}")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    True,
    Atom(String),
    Not(Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    /// `[a] φ`: agent `a` knows `φ`.
    Knows(String, Box<Formula>),
    /// `D{..} φ`: `φ` is distributed knowledge in the group.
    Distributed(Group, Box<Formula>),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FormulaError {
    #[error("distributed knowledge group must be non-empty")]
    EmptyGroup,
    #[error("syntax error at offset {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
}

impl Formula {
    pub fn atom(name: impl Into<String>) -> Self {
        Formula::Atom(name.into())
    }

    pub fn falsum() -> Self {
        Formula::True.not()
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(self) -> Self {
        Formula::Not(Box::new(self))
    }

    pub fn or(self, other: Formula) -> Self {
        Formula::Or(Box::new(self), Box::new(other))
    }

    pub fn and(self, other: Formula) -> Self {
        self.not().or(other.not()).not()
    }

    pub fn implies(self, other: Formula) -> Self {
        self.not().or(other)
    }

    pub fn iff(self, other: Formula) -> Self {
        self.clone().implies(other.clone()).and(other.implies(self))
    }

    pub fn knows(agent: impl Into<String>, child: Formula) -> Self {
        Formula::Knows(agent.into(), Box::new(child))
    }

    pub fn possible(agent: impl Into<String>, child: Formula) -> Self {
        Formula::knows(agent, child.not()).not()
    }

    pub fn distributed(group: Group, child: Formula) -> Self {
        Formula::Distributed(group, Box::new(child))
    }

    /// Left-nested conjunction; `true` when empty.
    pub fn conj<I: IntoIterator<Item = Formula>>(parts: I) -> Self {
        parts
            .into_iter()
            .reduce(Formula::and)
            .unwrap_or(Formula::True)
    }

    /// Left-nested disjunction; `false` when empty.
    pub fn disj<I: IntoIterator<Item = Formula>>(parts: I) -> Self {
        parts
            .into_iter()
            .reduce(Formula::or)
            .unwrap_or_else(Formula::falsum)
    }

    pub fn parse(text: &str) -> Result<Self, FormulaError> {
        parse(text)
    }

    pub fn is_l0(&self) -> bool {
        match self {
            Formula::True | Formula::Atom(_) => true,
            Formula::Not(c) | Formula::Knows(_, c) => c.is_l0(),
            Formula::Or(l, r) => l.is_l0() && r.is_l0(),
            Formula::Distributed(..) => false,
        }
    }

    pub fn modal_depth(&self) -> usize {
        match self {
            Formula::True | Formula::Atom(_) => 0,
            Formula::Not(c) => c.modal_depth(),
            Formula::Or(l, r) => l.modal_depth().max(r.modal_depth()),
            Formula::Knows(_, c) | Formula::Distributed(_, c) => 1 + c.modal_depth(),
        }
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        match self {
            Formula::True | Formula::Atom(_) => 1,
            Formula::Not(c) | Formula::Knows(_, c) | Formula::Distributed(_, c) => 1 + c.size(),
            Formula::Or(l, r) => 1 + l.size() + r.size(),
        }
    }

    pub fn meta(&self) -> FormulaMeta {
        let mut meta = FormulaMeta {
            atoms: BTreeSet::new(),
            agents: BTreeSet::new(),
            is_l0: self.is_l0(),
            modal_depth: self.modal_depth(),
        };
        self.collect(&mut meta.atoms, &mut meta.agents);
        meta
    }

    fn collect(&self, atoms: &mut BTreeSet<String>, agents: &mut BTreeSet<String>) {
        match self {
            Formula::True => {}
            Formula::Atom(p) => {
                atoms.insert(p.clone());
            }
            Formula::Not(c) => c.collect(atoms, agents),
            Formula::Or(l, r) => {
                l.collect(atoms, agents);
                r.collect(atoms, agents);
            }
            Formula::Knows(a, c) => {
                agents.insert(a.clone());
                c.collect(atoms, agents);
            }
            Formula::Distributed(g, c) => {
                agents.extend(g.iter().map(str::to_owned));
                c.collect(atoms, agents);
            }
        }
    }
}

/// Summary data computed by structural recursion over a formula.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FormulaMeta {
    pub atoms: BTreeSet<String>,
    /// Agents of boxes and of every `D` group.
    pub agents: BTreeSet<String>,
    pub is_l0: bool,
    pub modal_depth: usize,
}

// ---------------------------------------------------------------------------
// Printing

const PREC_OR: u8 = 3;
const PREC_AND: u8 = 4;
const PREC_UNARY: u8 = 5;

/// Recognizes `~(~l | ~r)` so it can be printed as `l & r`.
fn as_conjunction(f: &Formula) -> Option<(&Formula, &Formula)> {
    if let Formula::Not(inner) = f {
        if let Formula::Or(l, r) = inner.as_ref() {
            if let (Formula::Not(l), Formula::Not(r)) = (l.as_ref(), r.as_ref()) {
                return Some((l, r));
            }
        }
    }
    None
}

fn precedence(f: &Formula) -> u8 {
    if as_conjunction(f).is_some() {
        return PREC_AND;
    }
    match f {
        Formula::Or(..) => PREC_OR,
        _ => PREC_UNARY,
    }
}

fn write_at(f: &Formula, min_prec: u8, out: &mut String) {
    if precedence(f) < min_prec {
        out.push('(');
        write_formula(f, out);
        out.push(')');
    } else {
        write_formula(f, out);
    }
}

fn write_formula(f: &Formula, out: &mut String) {
    if let Some((l, r)) = as_conjunction(f) {
        write_at(l, PREC_AND, out);
        out.push_str(" & ");
        write_at(r, PREC_AND + 1, out);
        return;
    }
    match f {
        Formula::True => out.push_str("true"),
        Formula::Atom(p) => out.push_str(p),
        Formula::Not(inner) => match inner.as_ref() {
            Formula::True => out.push_str("false"),
            Formula::Knows(a, c) if matches!(c.as_ref(), Formula::Not(_)) => {
                let Formula::Not(body) = c.as_ref() else {
                    unreachable!()
                };
                out.push('<');
                out.push_str(a);
                out.push('>');
                write_at(body, PREC_UNARY, out);
            }
            _ => {
                out.push('~');
                write_at(inner, PREC_UNARY, out);
            }
        },
        Formula::Or(l, r) => {
            write_at(l, PREC_OR, out);
            out.push_str(" | ");
            write_at(r, PREC_OR + 1, out);
        }
        Formula::Knows(a, c) => {
            out.push('[');
            out.push_str(a);
            out.push(']');
            write_at(c, PREC_UNARY, out);
        }
        Formula::Distributed(g, c) => {
            out.push('D');
            out.push_str(&g.to_string());
            out.push(' ');
            write_at(c, PREC_UNARY, out);
        }
    }
}

pub fn print(f: &Formula) -> String {
    let mut out = String::new();
    write_formula(f, &mut out);
    out
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print(self))
    }
}

// ---------------------------------------------------------------------------
// Parsing

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Tilde,
    LBracket,
    RBracket,
    Lt,
    Gt,
    LBrace,
    RBrace,
    Comma,
    LParen,
    RParen,
    Amp,
    Bar,
    Arrow,
    DoubleArrow,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident(name) => return write!(f, "identifier `{name}`"),
            Tok::Tilde => "~",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::Lt => "<",
            Tok::Gt => ">",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::Comma => ",",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::Amp => "&",
            Tok::Bar => "|",
            Tok::Arrow => "->",
            Tok::DoubleArrow => "<->",
        };
        write!(f, "`{s}`")
    }
}

fn syntax(pos: usize, msg: impl Into<String>) -> FormulaError {
    FormulaError::Syntax {
        pos,
        msg: msg.into(),
    }
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, FormulaError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let tok = match c {
            b' ' | b'\t' | b'\r' | b'\n' => {
                i += 1;
                continue;
            }
            b'~' | b'!' => Tok::Tilde,
            b'[' => Tok::LBracket,
            b']' => Tok::RBracket,
            b'>' => Tok::Gt,
            b'{' => Tok::LBrace,
            b'}' => Tok::RBrace,
            b',' => Tok::Comma,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'&' => Tok::Amp,
            b'|' => Tok::Bar,
            b'-' if bytes.get(i + 1) == Some(&b'>') => {
                i += 1;
                Tok::Arrow
            }
            b'<' if bytes[i + 1..].starts_with(b"->") => {
                i += 2;
                Tok::DoubleArrow
            }
            b'<' => Tok::Lt,
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i + 1 < bytes.len()
                    && (bytes[i + 1].is_ascii_alphanumeric() || bytes[i + 1] == b'_')
                {
                    i += 1;
                }
                Tok::Ident(text[start..=i].to_owned())
            }
            _ => {
                let ch = text[start..].chars().next().unwrap_or('?');
                return Err(syntax(start, format!("unexpected character `{ch}`")));
            }
        };
        out.push((start, tok));
        i += 1;
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    idx: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.idx).map(|(_, t)| t)
    }

    fn peek_at(&self, offset: usize) -> Option<&Tok> {
        self.toks.get(self.idx + offset).map(|(_, t)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.idx).map_or(self.end, |(p, _)| *p)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.idx).map(|(_, t)| t.clone());
        self.idx += 1;
        t
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.idx += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<(), FormulaError> {
        let pos = self.pos();
        match self.bump() {
            Some(t) if t == tok => Ok(()),
            Some(t) => Err(syntax(pos, format!("expected {tok}, found {t}"))),
            None => Err(syntax(pos, format!("expected {tok}, found end of input"))),
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, FormulaError> {
        let pos = self.pos();
        match self.bump() {
            Some(Tok::Ident(name)) if name != "true" && name != "false" => Ok(name),
            Some(t) => Err(syntax(pos, format!("expected {what}, found {t}"))),
            None => Err(syntax(pos, format!("expected {what}, found end of input"))),
        }
    }

    fn form(&mut self) -> Result<Formula, FormulaError> {
        let mut lhs = self.imp()?;
        while self.eat(&Tok::DoubleArrow) {
            let rhs = self.imp()?;
            lhs = lhs.iff(rhs);
        }
        Ok(lhs)
    }

    fn imp(&mut self) -> Result<Formula, FormulaError> {
        let lhs = self.or()?;
        if self.eat(&Tok::Arrow) {
            let rhs = self.imp()?;
            return Ok(lhs.implies(rhs));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Formula, FormulaError> {
        let mut lhs = self.and()?;
        while self.eat(&Tok::Bar) {
            let rhs = self.and()?;
            lhs = lhs.or(rhs);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Formula, FormulaError> {
        let mut lhs = self.unary()?;
        while self.eat(&Tok::Amp) {
            let rhs = self.unary()?;
            lhs = lhs.and(rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, FormulaError> {
        let pos = self.pos();
        let is_group_d = matches!(self.peek(), Some(Tok::Ident(n)) if n == "D")
            && self.peek_at(1) == Some(&Tok::LBrace);
        if is_group_d {
            self.idx += 2;
            let mut agents = Vec::new();
            if self.peek() == Some(&Tok::RBrace) {
                return Err(syntax(pos, "distributed knowledge group must be non-empty"));
            }
            agents.push(self.ident("agent name")?);
            while self.eat(&Tok::Comma) {
                agents.push(self.ident("agent name")?);
            }
            self.expect(Tok::RBrace)?;
            let child = self.unary()?;
            return Ok(Formula::distributed(Group::new(agents)?, child));
        }
        match self.bump() {
            Some(Tok::Tilde) => Ok(self.unary()?.not()),
            Some(Tok::LBracket) => {
                let agent = self.ident("agent name")?;
                self.expect(Tok::RBracket)?;
                Ok(Formula::knows(agent, self.unary()?))
            }
            Some(Tok::Lt) => {
                let agent = self.ident("agent name")?;
                self.expect(Tok::Gt)?;
                Ok(Formula::possible(agent, self.unary()?))
            }
            Some(Tok::Ident(name)) if name == "true" => Ok(Formula::True),
            Some(Tok::Ident(name)) if name == "false" => Ok(Formula::falsum()),
            Some(Tok::Ident(name)) => Ok(Formula::Atom(name)),
            Some(Tok::LParen) => {
                let inner = self.form()?;
                self.expect(Tok::RParen)?;
                Ok(inner)
            }
            Some(t) => Err(syntax(pos, format!("unexpected {t}"))),
            None => Err(syntax(pos, "unexpected end of input")),
        }
    }
}

/// Parses the ASCII concrete syntax, expanding derived connectives.
pub fn parse(text: &str) -> Result<Formula, FormulaError> {
    let toks = lex(text)?;
    let mut parser = Parser {
        toks,
        idx: 0,
        end: text.len(),
    };
    let f = parser.form()?;
    if parser.idx < parser.toks.len() {
        let pos = parser.pos();
        let tok = parser.bump().expect("token present");
        return Err(syntax(pos, format!("trailing input starting at {tok}")));
    }
    Ok(f)
}

impl FromStr for Formula {
    type Err = FormulaError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}
