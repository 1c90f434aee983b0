//! HyperPCTL formulas: a three-sorted AST of state formulas, probability
//! expressions, and path formulas.
//!
//! Parsing yields the surface AST with derived operators still present.
//! [`desugar`] reduces it to the core variants and [`check_sentence`] binds
//! every quantified variable to its component index.

mod desugar;
mod parser;
mod print;
mod sentence;

use std::fmt;

use crate::rational::Rational;

pub use desugar::{desugar, desugar_expr, is_core};
pub use parser::{parse_formula, parse_prob_expr, ParseError};
pub use sentence::{
    bind_free, check_sentence, subformulas_inside_out, QuantifierKind, SentenceError,
    SentenceInfo,
};

/// A state variable: its source name until renaming, then its component
/// index (1-based) in the self-composition.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    Name(String),
    Index(usize),
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::Name(name) => f.write_str(name),
            Var::Index(i) => write!(f, "s{i}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    Lt,
    Le,
    Eq,
    Ge,
    Gt,
    /// Surface only; desugars to a negated equality.
    Ne,
}

impl Relation {
    pub fn holds(self, left: &Rational, right: &Rational) -> bool {
        match self {
            Relation::Lt => left < right,
            Relation::Le => left <= right,
            Relation::Eq => left == right,
            Relation::Ge => left >= right,
            Relation::Gt => left > right,
            Relation::Ne => left != right,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Lt => "<",
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
            Relation::Gt => ">",
            Relation::Ne => "!=",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum StateFormula {
    True,
    Atom { prop: String, var: Var },
    Not(Box<StateFormula>),
    And(Box<StateFormula>, Box<StateFormula>),
    Compare(ProbExpr, Relation, ProbExpr),
    Forall(Var, Box<StateFormula>),
    Exists(Var, Box<StateFormula>),
    // Derived forms.
    False,
    Or(Box<StateFormula>, Box<StateFormula>),
    Implies(Box<StateFormula>, Box<StateFormula>),
    Iff(Box<StateFormula>, Box<StateFormula>),
    /// `p in [lower, upper]`
    InInterval(ProbExpr, Rational, Rational),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ProbExpr {
    Prob(Box<PathFormula>),
    Const(Rational),
    Add(Box<ProbExpr>, Box<ProbExpr>),
    Sub(Box<ProbExpr>, Box<ProbExpr>),
    Mul(Box<ProbExpr>, Box<ProbExpr>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum PathFormula {
    Next(StateFormula),
    Until(StateFormula, StateFormula),
    BoundedUntil(StateFormula, StateFormula, u64, u64),
    // Derived forms.
    Eventually(StateFormula),
    BoundedEventually(StateFormula, u64, u64),
    /// Only meaningful directly under `P`; removed by complementation.
    Globally(StateFormula),
    BoundedGlobally(StateFormula, u64, u64),
}

// Shorthand constructors, mostly for building formulas in code.
impl StateFormula {
    pub fn atom(prop: impl Into<String>, var: impl Into<String>) -> Self {
        StateFormula::Atom {
            prop: prop.into(),
            var: Var::Name(var.into()),
        }
    }

    pub fn indexed(prop: impl Into<String>, index: usize) -> Self {
        StateFormula::Atom {
            prop: prop.into(),
            var: Var::Index(index),
        }
    }

    pub fn not(f: StateFormula) -> Self {
        StateFormula::Not(Box::new(f))
    }

    pub fn and(l: StateFormula, r: StateFormula) -> Self {
        StateFormula::And(Box::new(l), Box::new(r))
    }

    pub fn or(l: StateFormula, r: StateFormula) -> Self {
        StateFormula::Or(Box::new(l), Box::new(r))
    }

    pub fn implies(l: StateFormula, r: StateFormula) -> Self {
        StateFormula::Implies(Box::new(l), Box::new(r))
    }

    pub fn iff(l: StateFormula, r: StateFormula) -> Self {
        StateFormula::Iff(Box::new(l), Box::new(r))
    }

    pub fn forall(var: impl Into<String>, body: StateFormula) -> Self {
        StateFormula::Forall(Var::Name(var.into()), Box::new(body))
    }

    pub fn exists(var: impl Into<String>, body: StateFormula) -> Self {
        StateFormula::Exists(Var::Name(var.into()), Box::new(body))
    }

    pub fn compare(l: ProbExpr, rel: Relation, r: ProbExpr) -> Self {
        StateFormula::Compare(l, rel, r)
    }

    /// Conjunction of all items; `true` when empty.
    pub fn conjunction(items: impl IntoIterator<Item = StateFormula>) -> Self {
        items
            .into_iter()
            .reduce(StateFormula::and)
            .unwrap_or(StateFormula::True)
    }
}

impl ProbExpr {
    pub fn prob(path: PathFormula) -> Self {
        ProbExpr::Prob(Box::new(path))
    }

    pub fn constant(value: Rational) -> Self {
        ProbExpr::Const(value)
    }

    pub fn add(l: ProbExpr, r: ProbExpr) -> Self {
        ProbExpr::Add(Box::new(l), Box::new(r))
    }

    pub fn sub(l: ProbExpr, r: ProbExpr) -> Self {
        ProbExpr::Sub(Box::new(l), Box::new(r))
    }

    pub fn mul(l: ProbExpr, r: ProbExpr) -> Self {
        ProbExpr::Mul(Box::new(l), Box::new(r))
    }

    /// Every `P(...)` subterm, left to right.
    pub fn prob_terms(&self) -> Vec<&PathFormula> {
        let mut out = Vec::new();
        self.collect_prob_terms(&mut out);
        out
    }

    fn collect_prob_terms<'a>(&'a self, out: &mut Vec<&'a PathFormula>) {
        match self {
            ProbExpr::Prob(path) => out.push(path),
            ProbExpr::Const(_) => {}
            ProbExpr::Add(l, r) | ProbExpr::Sub(l, r) | ProbExpr::Mul(l, r) => {
                l.collect_prob_terms(out);
                r.collect_prob_terms(out);
            }
        }
    }
}

impl PathFormula {
    /// State-formula operands in left-to-right order.
    pub fn operands(&self) -> Vec<&StateFormula> {
        match self {
            PathFormula::Next(f)
            | PathFormula::Eventually(f)
            | PathFormula::BoundedEventually(f, _, _)
            | PathFormula::Globally(f)
            | PathFormula::BoundedGlobally(f, _, _) => vec![f],
            PathFormula::Until(l, r) | PathFormula::BoundedUntil(l, r, _, _) => vec![l, r],
        }
    }
}
