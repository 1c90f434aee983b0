//! Sentence checking, quantifier renaming, and inside-out subformula order.

use std::collections::HashSet;

use thiserror::Error;

use super::{PathFormula, ProbExpr, StateFormula, Var};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SentenceError {
    #[error("`{prop}@{var}` is not bound by any quantifier over `{var}`")]
    FreeVariable { prop: String, var: String },
    #[error("`{0}` is already renamed to a component index")]
    AlreadyIndexed(String),
    #[error("quantifiers are not allowed here")]
    UnexpectedQuantifier,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QuantifierKind {
    Forall,
    Exists,
}

/// A sentence after renaming: quantifier `i` (1-based, outermost first, left
/// to right) binds component `i` of the self-composition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SentenceInfo {
    pub formula: StateFormula,
    /// Indexed by component - 1.
    pub kinds: Vec<QuantifierKind>,
    /// Source variable name of each component.
    pub names: Vec<String>,
}

impl SentenceInfo {
    pub fn quantifier_count(&self) -> usize {
        self.kinds.len()
    }

    /// Component bound to `name`, if exactly one quantifier uses that name.
    pub fn component_of(&self, name: &str) -> Option<usize> {
        let mut hits = self.names.iter().enumerate().filter(|(_, n)| *n == name);
        match (hits.next(), hits.next()) {
            (Some((i, _)), None) => Some(i + 1),
            _ => None,
        }
    }
}

struct Renamer {
    scope: Vec<(String, usize)>,
    kinds: Vec<QuantifierKind>,
    names: Vec<String>,
    allow_quantifiers: bool,
}

impl Renamer {
    fn lookup(&self, name: &str) -> Option<usize> {
        self.scope
            .iter()
            .rev()
            .find(|(n, _)| n == name)
            .map(|(_, i)| *i)
    }

    fn state(&mut self, f: &StateFormula) -> Result<StateFormula, SentenceError> {
        use StateFormula as S;
        Ok(match f {
            S::True | S::False => f.clone(),
            S::Atom { prop, var } => match var {
                Var::Name(name) => match self.lookup(name) {
                    Some(i) => S::indexed(prop.clone(), i),
                    None => {
                        return Err(SentenceError::FreeVariable {
                            prop: prop.clone(),
                            var: name.clone(),
                        })
                    }
                },
                Var::Index(i) => return Err(SentenceError::AlreadyIndexed(format!("{prop}@s{i}"))),
            },
            S::Not(g) => S::not(self.state(g)?),
            S::And(l, r) => S::and(self.state(l)?, self.state(r)?),
            S::Or(l, r) => S::or(self.state(l)?, self.state(r)?),
            S::Implies(l, r) => S::implies(self.state(l)?, self.state(r)?),
            S::Iff(l, r) => S::iff(self.state(l)?, self.state(r)?),
            S::Compare(l, rel, r) => S::Compare(self.expr(l)?, *rel, self.expr(r)?),
            S::InInterval(p, lo, hi) => S::InInterval(self.expr(p)?, lo.clone(), hi.clone()),
            S::Forall(var, body) | S::Exists(var, body) => {
                if !self.allow_quantifiers {
                    return Err(SentenceError::UnexpectedQuantifier);
                }
                let name = match var {
                    Var::Name(n) => n.clone(),
                    Var::Index(i) => return Err(SentenceError::AlreadyIndexed(format!("s{i}"))),
                };
                let kind = if matches!(f, S::Forall(..)) {
                    QuantifierKind::Forall
                } else {
                    QuantifierKind::Exists
                };
                self.kinds.push(kind);
                self.names.push(name.clone());
                let index = self.kinds.len();
                self.scope.push((name, index));
                let body = self.state(body);
                self.scope.pop();
                let body = Box::new(body?);
                match kind {
                    QuantifierKind::Forall => S::Forall(Var::Index(index), body),
                    QuantifierKind::Exists => S::Exists(Var::Index(index), body),
                }
            }
        })
    }

    fn expr(&mut self, e: &ProbExpr) -> Result<ProbExpr, SentenceError> {
        Ok(match e {
            ProbExpr::Prob(path) => ProbExpr::prob(self.path(path)?),
            ProbExpr::Const(c) => ProbExpr::Const(c.clone()),
            ProbExpr::Add(l, r) => ProbExpr::add(self.expr(l)?, self.expr(r)?),
            ProbExpr::Sub(l, r) => ProbExpr::sub(self.expr(l)?, self.expr(r)?),
            ProbExpr::Mul(l, r) => ProbExpr::mul(self.expr(l)?, self.expr(r)?),
        })
    }

    fn path(&mut self, p: &PathFormula) -> Result<PathFormula, SentenceError> {
        use PathFormula as P;
        Ok(match p {
            P::Next(f) => P::Next(self.state(f)?),
            P::Until(l, r) => P::Until(self.state(l)?, self.state(r)?),
            P::BoundedUntil(l, r, k1, k2) => P::BoundedUntil(self.state(l)?, self.state(r)?, *k1, *k2),
            P::Eventually(f) => P::Eventually(self.state(f)?),
            P::BoundedEventually(f, k1, k2) => P::BoundedEventually(self.state(f)?, *k1, *k2),
            P::Globally(f) => P::Globally(self.state(f)?),
            P::BoundedGlobally(f, k1, k2) => P::BoundedGlobally(self.state(f)?, *k1, *k2),
        })
    }
}

/// Checks that `formula` is a sentence and renames its variables.
///
/// Quantifiers receive indices 1..n in preorder (outermost first, then left to
/// right). A name bound twice on the same branch refers to the innermost
/// binder.
pub fn check_sentence(formula: &StateFormula) -> Result<SentenceInfo, SentenceError> {
    let mut renamer = Renamer {
        scope: Vec::new(),
        kinds: Vec::new(),
        names: Vec::new(),
        allow_quantifiers: true,
    };
    let renamed = renamer.state(formula)?;
    Ok(SentenceInfo {
        formula: renamed,
        kinds: renamer.kinds,
        names: renamer.names,
    })
}

/// Replaces named atoms in a quantifier-free expression using `bindings`
/// (variable name, component index).
pub fn bind_free(expr: &ProbExpr, bindings: &[(String, usize)]) -> Result<ProbExpr, SentenceError> {
    let mut renamer = Renamer {
        scope: bindings.to_vec(),
        kinds: Vec::new(),
        names: Vec::new(),
        allow_quantifiers: false,
    };
    renamer.expr(expr)
}

/// Distinct state subformulas, children before parents. Operands of path
/// formulas under `P(...)` count as children of the comparison holding them.
pub fn subformulas_inside_out(formula: &StateFormula) -> Vec<&StateFormula> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    visit_state(formula, &mut seen, &mut out);
    out
}

fn visit_state<'a>(
    f: &'a StateFormula,
    seen: &mut HashSet<&'a StateFormula>,
    out: &mut Vec<&'a StateFormula>,
) {
    if seen.contains(f) {
        return;
    }
    use StateFormula as S;
    match f {
        S::True | S::False | S::Atom { .. } => {}
        S::Not(g) | S::Forall(_, g) | S::Exists(_, g) => visit_state(g, seen, out),
        S::And(l, r) | S::Or(l, r) | S::Implies(l, r) | S::Iff(l, r) => {
            visit_state(l, seen, out);
            visit_state(r, seen, out);
        }
        S::Compare(l, _, r) => {
            visit_expr(l, seen, out);
            visit_expr(r, seen, out);
        }
        S::InInterval(p, _, _) => visit_expr(p, seen, out),
    }
    seen.insert(f);
    out.push(f);
}

fn visit_expr<'a>(
    e: &'a ProbExpr,
    seen: &mut HashSet<&'a StateFormula>,
    out: &mut Vec<&'a StateFormula>,
) {
    for path in e.prob_terms() {
        for operand in path.operands() {
            visit_state(operand, seen, out);
        }
    }
}
