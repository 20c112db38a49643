//! Types of NL◇: formula syntax, parsing, printing, and interpretation of
//! formulas as ordered lists of base vector spaces.
//!
//! Concrete syntax:
//!
//! ```text
//! atom     := [a-z][a-z0-9]*
//! formula  := tensor (('/' tensor)* | ('\' tensor)*)
//! tensor   := unary ('*' unary)*
//! unary    := '<>' unary | '[]' unary | atom | '(' formula ')'
//! ```
//!
//! `<>` (diamond) and `[]` (box) bind tightest, then `*`, then the slashes.
//! Binary connectives associate left to right; mixing `/` and `\` at the same
//! level requires parentheses, so `a\b/c` is rejected while `(a\b)/c` and
//! `a\(b/c)` parse.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// A formula of NL◇.
///
/// `Over(a, b)` is `a/b` (seeks `b` to the right), `Under(a, b)` is `a\b`
/// (seeks `a` to the left). `Dia` and `Boxed` are the control modalities
/// `<>` and `[]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Atom(String),
    Dia(Box<Formula>),
    Boxed(Box<Formula>),
    Tensor(Box<Formula>, Box<Formula>),
    Over(Box<Formula>, Box<Formula>),
    Under(Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn atom(name: impl Into<String>) -> Self {
        Formula::Atom(name.into())
    }

    pub fn dia(a: Formula) -> Self {
        Formula::Dia(Box::new(a))
    }

    pub fn boxed(a: Formula) -> Self {
        Formula::Boxed(Box::new(a))
    }

    pub fn tensor(a: Formula, b: Formula) -> Self {
        Formula::Tensor(Box::new(a), Box::new(b))
    }

    pub fn over(a: Formula, b: Formula) -> Self {
        Formula::Over(Box::new(a), Box::new(b))
    }

    pub fn under(a: Formula, b: Formula) -> Self {
        Formula::Under(Box::new(a), Box::new(b))
    }

    pub fn is_atom(&self) -> bool {
        matches!(self, Formula::Atom(_))
    }

    /// Number of atom occurrences, which is also the slot count of the
    /// interpreted signature.
    pub fn atom_count(&self) -> usize {
        match self {
            Formula::Atom(_) => 1,
            Formula::Dia(a) | Formula::Boxed(a) => a.atom_count(),
            Formula::Tensor(a, b) | Formula::Over(a, b) | Formula::Under(a, b) => {
                a.atom_count() + b.atom_count()
            }
        }
    }

    /// Interprets the formula as a space signature: atoms map through
    /// `atoms`, every connective concatenates in written order, and the
    /// modalities are transparent.
    pub fn interpret(&self, atoms: &AtomMap) -> Result<SpaceSignature, FormulaError> {
        let mut spaces = Vec::with_capacity(self.atom_count());
        self.collect_spaces(atoms, &mut spaces)?;
        Ok(SpaceSignature::new(spaces))
    }

    fn collect_spaces(&self, atoms: &AtomMap, out: &mut Vec<BaseSpace>) -> Result<(), FormulaError> {
        match self {
            Formula::Atom(name) => {
                let space = atoms
                    .get(name)
                    .ok_or_else(|| FormulaError::UnknownAtom { name: name.clone() })?;
                out.push(space.clone());
                Ok(())
            }
            Formula::Dia(a) | Formula::Boxed(a) => a.collect_spaces(atoms, out),
            Formula::Tensor(a, b) | Formula::Over(a, b) | Formula::Under(a, b) => {
                a.collect_spaces(atoms, out)?;
                b.collect_spaces(atoms, out)
            }
        }
    }
}

/// Errors from parsing or interpreting formulas.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum FormulaError {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("atom `{name}` has no assigned base space")]
    UnknownAtom { name: String },
}

/// A named base vector space with its dimension.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BaseSpace {
    pub label: String,
    pub dim: usize,
}

impl BaseSpace {
    pub fn new(label: impl Into<String>, dim: usize) -> Self {
        BaseSpace { label: label.into(), dim }
    }
}

impl fmt::Display for BaseSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.label, self.dim)
    }
}

/// Ordered list of base spaces; the tensor-product shape of an interpreted
/// formula. The empty signature is the scalar space.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct SpaceSignature {
    components: Vec<BaseSpace>,
}

impl SpaceSignature {
    pub fn new(components: Vec<BaseSpace>) -> Self {
        SpaceSignature { components }
    }

    pub fn scalar() -> Self {
        SpaceSignature::default()
    }

    pub fn components(&self) -> &[BaseSpace] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.components.iter().map(|c| c.dim).collect()
    }

    /// Dimension of the flattened product space (1 for the scalar space).
    pub fn total_dim(&self) -> usize {
        self.components.iter().map(|c| c.dim).product()
    }

    pub fn concat(&self, other: &SpaceSignature) -> SpaceSignature {
        let mut components = self.components.clone();
        components.extend(other.components.iter().cloned());
        SpaceSignature::new(components)
    }
}

impl fmt::Display for SpaceSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.components.is_empty() {
            return write!(f, "I");
        }
        for (k, c) in self.components.iter().enumerate() {
            if k > 0 {
                write!(f, "⊗")?;
            }
            write!(f, "{}", c.label)?;
        }
        Ok(())
    }
}

/// Assignment of atoms to base spaces, e.g. `np ↦ N(4)`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AtomMap {
    map: BTreeMap<String, BaseSpace>,
}

impl AtomMap {
    pub fn new() -> Self {
        AtomMap::default()
    }

    pub fn insert(&mut self, atom: impl Into<String>, space: BaseSpace) {
        self.map.insert(atom.into(), space);
    }

    pub fn get(&self, atom: &str) -> Option<&BaseSpace> {
        self.map.get(atom)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &BaseSpace)> {
        self.map.iter().map(|(k, v)| (k.as_str(), v))
    }

    /// Convenience constructor from `(atom, label, dim)` triples.
    pub fn from_entries<I, S1, S2>(entries: I) -> Self
    where
        I: IntoIterator<Item = (S1, S2, usize)>,
        S1: Into<String>,
        S2: Into<String>,
    {
        let mut map = AtomMap::new();
        for (atom, label, dim) in entries {
            map.insert(atom, BaseSpace::new(label, dim));
        }
        map
    }
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Parser { src: src.as_bytes(), pos: 0 }
    }

    fn error(&self, msg: impl Into<String>) -> FormulaError {
        FormulaError::Syntax { pos: self.pos, msg: msg.into() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, token: &str) -> bool {
        self.skip_ws();
        if self.src[self.pos..].starts_with(token.as_bytes()) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    fn parse_formula(&mut self) -> Result<Formula, FormulaError> {
        let mut lhs = self.parse_tensor()?;
        // The first slash fixes the direction for this level; the other
        // direction is then a syntax error until parentheses reset it.
        let mut level_op: Option<u8> = None;
        while let Some(op @ (b'/' | b'\\')) = self.peek() {
            match level_op {
                None => level_op = Some(op),
                Some(prev) if prev != op => {
                    return Err(self.error(
                        "mixing `/` and `\\` at the same level is ambiguous; add parentheses",
                    ));
                }
                Some(_) => {}
            }
            self.pos += 1;
            let rhs = self.parse_tensor()?;
            lhs = if op == b'/' { Formula::over(lhs, rhs) } else { Formula::under(lhs, rhs) };
        }
        Ok(lhs)
    }

    fn parse_tensor(&mut self) -> Result<Formula, FormulaError> {
        let mut lhs = self.parse_unary()?;
        while self.peek() == Some(b'*') {
            self.pos += 1;
            let rhs = self.parse_unary()?;
            lhs = Formula::tensor(lhs, rhs);
        }
        Ok(lhs)
    }

    fn parse_unary(&mut self) -> Result<Formula, FormulaError> {
        if self.eat("<>") {
            return Ok(Formula::dia(self.parse_unary()?));
        }
        if self.eat("[]") {
            return Ok(Formula::boxed(self.parse_unary()?));
        }
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.parse_formula()?;
                if self.peek() == Some(b')') {
                    self.pos += 1;
                    Ok(inner)
                } else {
                    Err(self.error("expected `)`"))
                }
            }
            Some(c) if c.is_ascii_lowercase() => self.parse_atom(),
            Some(c) => Err(self.error(format!("unexpected character `{}`", c as char))),
            None => Err(self.error("unexpected end of input")),
        }
    }

    fn parse_atom(&mut self) -> Result<Formula, FormulaError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_lowercase() || self.src[self.pos].is_ascii_digit())
        {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.error("expected atom"));
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap().to_string();
        Ok(Formula::Atom(name))
    }

    fn expect_end(&mut self) -> Result<(), FormulaError> {
        self.skip_ws();
        if self.pos == self.src.len() {
            Ok(())
        } else {
            Err(self.error("trailing input after formula"))
        }
    }
}

impl FromStr for Formula {
    type Err = FormulaError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut parser = Parser::new(s);
        let formula = parser.parse_formula()?;
        parser.expect_end()?;
        Ok(formula)
    }
}

// ---------------------------------------------------------------------------
// Printing
// ---------------------------------------------------------------------------

/// Binding strength used to decide where parentheses are required.
#[derive(PartialEq, Eq, PartialOrd, Ord, Clone, Copy)]
enum Prec {
    Slash,
    Tensor,
    Unary,
}

impl Formula {
    fn prec(&self) -> Prec {
        match self {
            Formula::Atom(_) | Formula::Dia(_) | Formula::Boxed(_) => Prec::Unary,
            Formula::Tensor(_, _) => Prec::Tensor,
            Formula::Over(_, _) | Formula::Under(_, _) => Prec::Slash,
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, parent: Prec, right_child: bool) -> fmt::Result {
        let me = self.prec();
        // A child needs parentheses when it binds looser than its parent, or
        // at equal binary precedence in right position (connectives associate
        // left), or at the slash level whenever ops could mix ambiguously.
        let needs_parens = match (parent, me) {
            (p, m) if m < p => true,
            (Prec::Slash, Prec::Slash) => true,
            (Prec::Tensor, Prec::Tensor) => right_child,
            _ => false,
        };
        if needs_parens {
            write!(f, "(")?;
        }
        match self {
            Formula::Atom(name) => write!(f, "{name}")?,
            Formula::Dia(a) => {
                write!(f, "<>")?;
                a.fmt_prec(f, Prec::Unary, false)?;
            }
            Formula::Boxed(a) => {
                write!(f, "[]")?;
                a.fmt_prec(f, Prec::Unary, false)?;
            }
            Formula::Tensor(a, b) => {
                a.fmt_prec(f, Prec::Tensor, false)?;
                write!(f, "*")?;
                b.fmt_prec(f, Prec::Tensor, true)?;
            }
            Formula::Over(a, b) => {
                a.fmt_prec(f, Prec::Slash, false)?;
                write!(f, "/")?;
                b.fmt_prec(f, Prec::Slash, true)?;
            }
            Formula::Under(a, b) => {
                a.fmt_prec(f, Prec::Slash, false)?;
                write!(f, "\\")?;
                b.fmt_prec(f, Prec::Slash, true)?;
            }
        }
        if needs_parens {
            write!(f, ")")?;
        }
        Ok(())
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // Top level renders without outer parentheses; Slash is the loosest
        // level so nothing is elided.
        match self.prec() {
            Prec::Slash => {
                // Same trick as fmt_prec but without the forced parens that
                // (Slash, Slash) would add: render the node directly.
                match self {
                    Formula::Over(a, b) => {
                        a.fmt_prec(f, Prec::Slash, false)?;
                        write!(f, "/")?;
                        b.fmt_prec(f, Prec::Slash, true)
                    }
                    Formula::Under(a, b) => {
                        a.fmt_prec(f, Prec::Slash, false)?;
                        write!(f, "\\")?;
                        b.fmt_prec(f, Prec::Slash, true)
                    }
                    _ => unreachable!(),
                }
            }
            _ => self.fmt_prec(f, Prec::Slash, false),
        }
    }
}
