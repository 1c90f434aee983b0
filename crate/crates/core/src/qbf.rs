//! Quantified Boolean formulas, their reduction to a two-state chain, and a
//! brute-force evaluator.
//!
//! Text format: `forall x1. exists x2. (x1 & x2) | (!x1 & !x2)`. The matrix
//! uses `!`, `&`, `|` and parentheses, binding in that order.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::formula::StateFormula;
use crate::model::{two_state_fixture, Dtmc};

pub const DEFAULT_QBF_CAP: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QbfError {
    #[error("column {column}: {message}")]
    Syntax { column: usize, message: String },
    #[error("variable `{0}` is quantified more than once")]
    DuplicateVariable(String),
    #[error("variable `{0}` is not quantified")]
    UnboundVariable(String),
    #[error("{count} quantified variables exceed the cap of {cap}")]
    CapExceeded { count: usize, cap: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Quantifier {
    Forall,
    Exists,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum BoolExpr {
    Var(String),
    Not(Box<BoolExpr>),
    And(Box<BoolExpr>, Box<BoolExpr>),
    Or(Box<BoolExpr>, Box<BoolExpr>),
}

impl BoolExpr {
    pub fn var(name: impl Into<String>) -> Self {
        BoolExpr::Var(name.into())
    }

    pub fn not(e: BoolExpr) -> Self {
        BoolExpr::Not(Box::new(e))
    }

    pub fn and(l: BoolExpr, r: BoolExpr) -> Self {
        BoolExpr::And(Box::new(l), Box::new(r))
    }

    pub fn or(l: BoolExpr, r: BoolExpr) -> Self {
        BoolExpr::Or(Box::new(l), Box::new(r))
    }

    pub fn eval(&self, env: &HashMap<&str, bool>) -> bool {
        match self {
            BoolExpr::Var(v) => env[v.as_str()],
            BoolExpr::Not(e) => !e.eval(env),
            BoolExpr::And(l, r) => l.eval(env) && r.eval(env),
            BoolExpr::Or(l, r) => l.eval(env) || r.eval(env),
        }
    }

    /// Number of `!`, `&` and `|` nodes.
    pub fn connectives(&self) -> usize {
        match self {
            BoolExpr::Var(_) => 0,
            BoolExpr::Not(e) => 1 + e.connectives(),
            BoolExpr::And(l, r) | BoolExpr::Or(l, r) => 1 + l.connectives() + r.connectives(),
        }
    }

    fn variables<'a>(&'a self, out: &mut BTreeSet<&'a str>) {
        match self {
            BoolExpr::Var(v) => {
                out.insert(v);
            }
            BoolExpr::Not(e) => e.variables(out),
            BoolExpr::And(l, r) | BoolExpr::Or(l, r) => {
                l.variables(out);
                r.variables(out);
            }
        }
    }
}

impl fmt::Display for BoolExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let operand = |e: &BoolExpr, f: &mut fmt::Formatter<'_>| match e {
            BoolExpr::Var(_) | BoolExpr::Not(_) => write!(f, "{e}"),
            _ => write!(f, "({e})"),
        };
        match self {
            BoolExpr::Var(v) => f.write_str(v),
            BoolExpr::Not(e) => {
                f.write_str("!")?;
                operand(e, f)
            }
            BoolExpr::And(l, r) | BoolExpr::Or(l, r) => {
                operand(l, f)?;
                f.write_str(if matches!(self, BoolExpr::And(..)) { " & " } else { " | " })?;
                operand(r, f)
            }
        }
    }
}

/// A prenex QBF: distinct quantified variables and a matrix over them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Qbf {
    prefix: Vec<(Quantifier, String)>,
    matrix: BoolExpr,
}

impl Qbf {
    pub fn new(prefix: Vec<(Quantifier, String)>, matrix: BoolExpr) -> Result<Self, QbfError> {
        let mut seen = BTreeSet::new();
        for (_, v) in &prefix {
            if !seen.insert(v.as_str()) {
                return Err(QbfError::DuplicateVariable(v.clone()));
            }
        }
        let mut used = BTreeSet::new();
        matrix.variables(&mut used);
        if let Some(v) = used.iter().find(|v| !seen.contains(*v)) {
            return Err(QbfError::UnboundVariable(v.to_string()));
        }
        Ok(Qbf { prefix, matrix })
    }

    pub fn prefix(&self) -> &[(Quantifier, String)] {
        &self.prefix
    }

    pub fn matrix(&self) -> &BoolExpr {
        &self.matrix
    }
}

impl fmt::Display for Qbf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (q, v) in &self.prefix {
            let word = match q {
                Quantifier::Forall => "forall",
                Quantifier::Exists => "exists",
            };
            write!(f, "{word} {v}. ")?;
        }
        write!(f, "{}", self.matrix)
    }
}

struct Cursor<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn skip_ws(&mut self) {
        let rest = &self.text[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, QbfError> {
        Err(QbfError::Syntax {
            column: self.text[..self.pos].chars().count() + 1,
            message: message.into(),
        })
    }

    fn eat(&mut self, token: &str) -> bool {
        self.skip_ws();
        if self.text[self.pos..].starts_with(token) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    fn ident(&mut self) -> Option<&'a str> {
        self.skip_ws();
        let rest = &self.text[self.pos..];
        let len = rest
            .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
            .unwrap_or(rest.len());
        if len == 0 || rest.starts_with(|c: char| c.is_ascii_digit()) {
            return None;
        }
        self.pos += len;
        Some(&rest[..len])
    }

    fn keyword(&mut self) -> Option<Quantifier> {
        let save = self.pos;
        match self.ident() {
            Some("forall") => Some(Quantifier::Forall),
            Some("exists") => Some(Quantifier::Exists),
            _ => {
                self.pos = save;
                None
            }
        }
    }

    fn or(&mut self) -> Result<BoolExpr, QbfError> {
        let mut left = self.and()?;
        while self.eat("|") {
            left = BoolExpr::or(left, self.and()?);
        }
        Ok(left)
    }

    fn and(&mut self) -> Result<BoolExpr, QbfError> {
        let mut left = self.unary()?;
        while self.eat("&") {
            left = BoolExpr::and(left, self.unary()?);
        }
        Ok(left)
    }

    fn unary(&mut self) -> Result<BoolExpr, QbfError> {
        if self.eat("!") {
            return Ok(BoolExpr::not(self.unary()?));
        }
        if self.eat("(") {
            let inner = self.or()?;
            if !self.eat(")") {
                return self.error("expected `)`");
            }
            return Ok(inner);
        }
        match self.ident() {
            Some("forall" | "exists") => self.error("quantifiers must precede the matrix"),
            Some(v) => Ok(BoolExpr::var(v)),
            None => self.error("expected a variable, `!` or `(`"),
        }
    }
}

/// Parses the prefix-matrix text format.
pub fn parse_qbf(text: &str) -> Result<Qbf, QbfError> {
    let mut cur = Cursor { text, pos: 0 };
    let mut prefix = Vec::new();
    while let Some(q) = cur.keyword() {
        let Some(v) = cur.ident() else {
            return cur.error("expected a variable name");
        };
        prefix.push((q, v.to_string()));
        if !cur.eat(".") {
            return cur.error("expected `.` after the quantified variable");
        }
    }
    let matrix = cur.or()?;
    cur.skip_ws();
    if cur.pos < text.len() {
        return cur.error("unexpected trailing input");
    }
    Qbf::new(prefix, matrix)
}

/// The two-state chain and the sentence whose verdict equals the truth of
/// `q`. Variable `x_i` (in prefix order) becomes `a@s{i}`; assigning `s0` to
/// a variable means true, `s1` false.
pub fn reduce(q: &Qbf) -> (Dtmc, StateFormula) {
    let names: HashMap<&str, String> = q
        .prefix
        .iter()
        .enumerate()
        .map(|(i, (_, v))| (v.as_str(), format!("s{}", i + 1)))
        .collect();
    let mut sentence = translate(&q.matrix, &names);
    for (q, v) in q.prefix.iter().rev() {
        let var = names[v.as_str()].clone();
        sentence = match q {
            Quantifier::Forall => StateFormula::forall(var, sentence),
            Quantifier::Exists => StateFormula::exists(var, sentence),
        };
    }
    (two_state_fixture(), sentence)
}

fn translate(e: &BoolExpr, names: &HashMap<&str, String>) -> StateFormula {
    match e {
        BoolExpr::Var(v) => StateFormula::atom("a", names[v.as_str()].clone()),
        BoolExpr::Not(e) => StateFormula::not(translate(e, names)),
        BoolExpr::And(l, r) => StateFormula::and(translate(l, names), translate(r, names)),
        BoolExpr::Or(l, r) => StateFormula::or(translate(l, names), translate(r, names)),
    }
}

/// Evaluates `q` by expanding every quantifier, refusing more than
/// [`DEFAULT_QBF_CAP`] variables.
pub fn qbf_brute_force(q: &Qbf) -> Result<bool, QbfError> {
    qbf_brute_force_with_cap(q, DEFAULT_QBF_CAP)
}

pub fn qbf_brute_force_with_cap(q: &Qbf, cap: usize) -> Result<bool, QbfError> {
    if q.prefix.len() > cap {
        return Err(QbfError::CapExceeded {
            count: q.prefix.len(),
            cap,
        });
    }
    let mut env = HashMap::new();
    Ok(expand(q, 0, &mut env))
}

fn expand<'a>(q: &'a Qbf, depth: usize, env: &mut HashMap<&'a str, bool>) -> bool {
    let Some((quantifier, v)) = q.prefix.get(depth) else {
        return q.matrix.eval(env);
    };
    let mut branch = |value| {
        env.insert(v.as_str(), value);
        expand(q, depth + 1, env)
    };
    match quantifier {
        Quantifier::Forall => branch(true) && branch(false),
        Quantifier::Exists => branch(true) || branch(false),
    }
}
