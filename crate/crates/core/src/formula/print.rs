//! Canonical printing. The output re-parses to the same AST for formulas with
//! named variables.

use std::fmt;

use super::{PathFormula, ProbExpr, StateFormula};
use crate::rational::format_rational;

fn is_simple(f: &StateFormula) -> bool {
    matches!(
        f,
        StateFormula::True | StateFormula::False | StateFormula::Atom { .. } | StateFormula::Not(_)
    )
}

struct Operand<'a>(&'a StateFormula);

impl fmt::Display for Operand<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if is_simple(self.0) {
            write!(f, "{}", self.0)
        } else {
            write!(f, "({})", self.0)
        }
    }
}

impl fmt::Display for StateFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use StateFormula as S;
        match self {
            S::True => f.write_str("true"),
            S::False => f.write_str("false"),
            S::Atom { prop, var } => write!(f, "{prop}@{var}"),
            S::Not(inner) => write!(f, "!{}", Operand(inner)),
            S::And(l, r) => write!(f, "{} & {}", Operand(l), Operand(r)),
            S::Or(l, r) => write!(f, "{} | {}", Operand(l), Operand(r)),
            S::Implies(l, r) => write!(f, "{} => {}", Operand(l), Operand(r)),
            S::Iff(l, r) => write!(f, "{} <=> {}", Operand(l), Operand(r)),
            S::Compare(l, rel, r) => write!(f, "{l} {} {r}", rel.symbol()),
            S::InInterval(p, lower, upper) => write!(
                f,
                "{p} in [{}, {}]",
                format_rational(lower),
                format_rational(upper)
            ),
            S::Forall(v, body) => write!(f, "forall {v}. {body}"),
            S::Exists(v, body) => write!(f, "exists {v}. {body}"),
        }
    }
}

impl fmt::Display for ProbExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProbExpr::Prob(path) => write!(f, "P({path})"),
            ProbExpr::Const(c) => f.write_str(&format_rational(c)),
            ProbExpr::Add(l, r) => write!(f, "({l} + {r})"),
            ProbExpr::Sub(l, r) => write!(f, "({l} - {r})"),
            ProbExpr::Mul(l, r) => write!(f, "({l} * {r})"),
        }
    }
}

impl fmt::Display for PathFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use PathFormula as P;
        match self {
            P::Next(g) => write!(f, "X {}", Operand(g)),
            P::Until(l, r) => write!(f, "{} U {}", Operand(l), Operand(r)),
            P::BoundedUntil(l, r, k1, k2) => {
                write!(f, "{} U[{k1},{k2}] {}", Operand(l), Operand(r))
            }
            P::Eventually(g) => write!(f, "F {}", Operand(g)),
            P::BoundedEventually(g, k1, k2) => write!(f, "F[{k1},{k2}] {}", Operand(g)),
            P::Globally(g) => write!(f, "G {}", Operand(g)),
            P::BoundedGlobally(g, k1, k2) => write!(f, "G[{k1},{k2}] {}", Operand(g)),
        }
    }
}
