//! The model checker: self-compose, label inside-out, read off the verdict.

use std::collections::{BTreeMap, HashMap};

use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::engine::{
    prob_next, prob_until_bounded, prob_until_unbounded, ProbVector, SatVector, SolveError,
};
use crate::formula::{
    bind_free, check_sentence, desugar, desugar_expr, parse_formula, parse_prob_expr,
    subformulas_inside_out, ParseError, PathFormula, ProbExpr, QuantifierKind, Relation,
    SentenceError, SentenceInfo, StateFormula, Var,
};
use crate::model::{Dtmc, ModelError};
use crate::product::{self_compose, ProductChain, ProductError, DEFAULT_STATE_BUDGET};
use crate::rational::{format_rational, Rational};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CheckError {
    #[error("formula: {0}")]
    Parse(#[from] ParseError),
    #[error("{0}")]
    Sentence(#[from] SentenceError),
    #[error("{0}")]
    Model(#[from] ModelError),
    #[error("{0}")]
    Product(#[from] ProductError),
    #[error("{0}")]
    Solve(#[from] SolveError),
    #[error("probe `{probe}`: {message}")]
    Probe { probe: String, message: String },
    #[error("internal error: {0}")]
    Internal(String),
}

#[derive(Debug, Clone)]
pub struct CheckOptions {
    /// Largest product state count the checker may build.
    pub budget: usize,
    /// Probability expressions to tabulate over the product, written with the
    /// sentence's variable names.
    pub probes: Vec<String>,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            budget: DEFAULT_STATE_BUDGET,
            probes: Vec::new(),
        }
    }
}

/// A quantified variable and the base state chosen for it.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Binding {
    pub var: String,
    pub state: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub satisfied: bool,
    /// Instantiation of the leading existential block, when satisfied.
    pub witness: Vec<Binding>,
    /// Instantiation of the leading universal block, when violated.
    pub counterexample: Vec<Binding>,
    /// Probe text, then product tuple such as `(0,3)`, then `p/q`.
    pub probes: BTreeMap<String, BTreeMap<String, String>>,
}

/// Satisfaction vectors of state subformulas and probability vectors of path
/// formulas over one product chain.
#[derive(Debug, Clone, Default)]
pub struct LabelTable {
    sat: HashMap<StateFormula, SatVector>,
    prob: HashMap<PathFormula, ProbVector>,
}

impl LabelTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn sat(&self, formula: &StateFormula) -> Option<&SatVector> {
        self.sat.get(formula)
    }

    pub fn prob(&self, path: &PathFormula) -> Option<&ProbVector> {
        self.prob.get(path)
    }

    pub fn sat_count(&self) -> usize {
        self.sat.len()
    }

    pub fn prob_count(&self) -> usize {
        self.prob.len()
    }

    /// Labels every subformula of `formula` not labeled yet, children first.
    pub fn label(&mut self, pc: &ProductChain, formula: &StateFormula) -> Result<(), CheckError> {
        for f in subformulas_inside_out(formula) {
            if !self.sat.contains_key(f) {
                let v = self.label_one(pc, f)?;
                self.sat.insert(f.clone(), v);
            }
        }
        Ok(())
    }

    fn child(&self, f: &StateFormula) -> Result<&SatVector, CheckError> {
        self.sat
            .get(f)
            .ok_or_else(|| CheckError::Internal(format!("`{f}` labeled before its operands")))
    }

    fn label_one(&mut self, pc: &ProductChain, f: &StateFormula) -> Result<SatVector, CheckError> {
        use StateFormula as S;
        let n = pc.state_count();
        Ok(match f {
            S::True => SatVector::full(n),
            S::Atom {
                prop,
                var: Var::Index(i),
            } => SatVector::from_fn(n, |s| pc.has_label(s, prop, *i)),
            S::Not(g) => self.child(g)?.complement(),
            S::And(l, r) => self.child(l)?.and(self.child(r)?),
            S::Compare(l, rel, r) => {
                self.compute_paths(pc, l.prob_terms().into_iter().chain(r.prob_terms()))?;
                let mut out = SatVector::empty(n);
                for s in 0..n {
                    let lv = eval_prob_expr(self, l, s)?;
                    let rv = eval_prob_expr(self, r, s)?;
                    out.set(s, rel.holds(&lv, &rv));
                }
                out
            }
            S::Forall(Var::Index(i), body) | S::Exists(Var::Index(i), body) => {
                let body = self.child(body)?;
                quantify(pc, body, *i, matches!(f, S::Exists(..)))
            }
            _ => {
                return Err(CheckError::Internal(format!(
                    "`{f}` is not a renamed core formula"
                )))
            }
        })
    }

    fn compute_paths<'a>(
        &mut self,
        pc: &ProductChain,
        paths: impl Iterator<Item = &'a PathFormula>,
    ) -> Result<(), CheckError> {
        let mut missing: Vec<&PathFormula> = Vec::new();
        for p in paths {
            if !self.prob.contains_key(p) && !missing.contains(&p) {
                missing.push(p);
            }
        }
        let table = &*self;
        let computed: Vec<ProbVector> = missing
            .par_iter()
            .map(|p| table.path_vector(pc, p))
            .collect::<Result<_, _>>()?;
        for (p, v) in missing.into_iter().zip(computed) {
            self.prob.insert(p.clone(), v);
        }
        Ok(())
    }

    fn path_vector(&self, pc: &ProductChain, path: &PathFormula) -> Result<ProbVector, CheckError> {
        Ok(match path {
            PathFormula::Next(f) => prob_next(pc, self.child(f)?),
            PathFormula::Until(l, r) => prob_until_unbounded(pc, self.child(l)?, self.child(r)?)?,
            PathFormula::BoundedUntil(l, r, k1, k2) => {
                prob_until_bounded(pc, self.child(l)?, self.child(r)?, *k1, *k2)
            }
            other => {
                return Err(CheckError::Internal(format!(
                    "path formula `{other}` is not in core form"
                )))
            }
        })
    }
}

/// Aggregates `body` over component `i`: any (exists) or all (forall) of the
/// tuples that differ from `s` only at position `i`.
fn quantify(pc: &ProductChain, body: &SatVector, i: usize, exists: bool) -> SatVector {
    let n = pc.state_count();
    let base = pc.base().state_count();
    let stride = pc.stride(i);
    let mut out = SatVector::empty(n);
    for s in (0..n).filter(|&s| pc.component(s, i) == 0) {
        let mut members = (0..base).map(|j| s + j * stride);
        let value = if exists {
            members.any(|t| body.get(t))
        } else {
            members.all(|t| body.get(t))
        };
        if value {
            for j in 0..base {
                out.set(s + j * stride, true);
            }
        }
    }
    out
}

/// Value of `e` at product state `s`.
pub fn eval_prob_expr(table: &LabelTable, e: &ProbExpr, s: usize) -> Result<Rational, CheckError> {
    Ok(match e {
        ProbExpr::Prob(path) => table
            .prob(path)
            .ok_or_else(|| CheckError::Internal(format!("P({path}) was not computed")))?[s]
            .clone(),
        ProbExpr::Const(c) => c.clone(),
        ProbExpr::Add(l, r) => eval_prob_expr(table, l, s)? + eval_prob_expr(table, r, s)?,
        ProbExpr::Sub(l, r) => eval_prob_expr(table, l, s)? - eval_prob_expr(table, r, s)?,
        ProbExpr::Mul(l, r) => eval_prob_expr(table, l, s)? * eval_prob_expr(table, r, s)?,
    })
}

/// Labels every subformula of the renamed sentence over `pc`.
pub fn label_all(pc: &ProductChain, info: &SentenceInfo) -> Result<LabelTable, CheckError> {
    let mut table = LabelTable::new();
    table.label(pc, &info.formula)?;
    Ok(table)
}

/// Builds the product for `info`: `M^n`, or a one-state loop when `n = 0`.
pub fn product_for(m: &Dtmc, info: &SentenceInfo, budget: usize) -> Result<ProductChain, CheckError> {
    Ok(match info.quantifier_count() {
        0 => ProductChain::unit(m),
        n => self_compose(m, n, budget)?,
    })
}

/// Walks the leading block of `kind` quantifiers, fixing each component to
/// the smallest base state whose body value equals `target`.
pub fn extract_witness(
    pc: &ProductChain,
    table: &LabelTable,
    info: &SentenceInfo,
    kind: QuantifierKind,
    target: bool,
) -> Result<Vec<Binding>, CheckError> {
    let mut bindings = Vec::new();
    let mut state = 0usize;
    let mut current = &info.formula;
    loop {
        let (i, body) = match (kind, current) {
            (QuantifierKind::Forall, StateFormula::Forall(Var::Index(i), body))
            | (QuantifierKind::Exists, StateFormula::Exists(Var::Index(i), body)) => (*i, body),
            _ => break,
        };
        let vector = table.child(body)?;
        let stride = pc.stride(i);
        let cleared = state - pc.component(state, i) * stride;
        let choice = (0..pc.base().state_count())
            .find(|j| vector.get(cleared + j * stride) == target)
            .ok_or_else(|| CheckError::Internal(format!("no instance for component {i}")))?;
        state = cleared + choice * stride;
        bindings.push(Binding {
            var: info.names[i - 1].clone(),
            state: choice,
        });
        current = body;
    }
    Ok(bindings)
}

fn tuple_key(pc: &ProductChain, s: usize) -> String {
    let parts: Vec<String> = pc.decode(s).iter().map(ToString::to_string).collect();
    format!("({})", parts.join(","))
}

fn run_probe(
    pc: &ProductChain,
    table: &mut LabelTable,
    info: &SentenceInfo,
    probe: &str,
) -> Result<BTreeMap<String, String>, CheckError> {
    let fail = |message: String| CheckError::Probe {
        probe: probe.to_string(),
        message,
    };
    let expr = parse_prob_expr(probe).map_err(|e| fail(e.to_string()))?;
    let mut bindings = Vec::new();
    for name in &info.names {
        if let Some(i) = info.component_of(name) {
            bindings.push((name.clone(), i));
        }
    }
    let expr = bind_free(&desugar_expr(&expr), &bindings).map_err(|e| {
        let ambiguous = matches!(&e, SentenceError::FreeVariable { var, .. } if info.names.contains(var));
        if ambiguous {
            fail(format!("{e}; the name is bound by more than one quantifier"))
        } else {
            fail(e.to_string())
        }
    })?;
    // A comparison wrapper makes the operands and P(...) terms get labeled.
    let holder = StateFormula::Compare(expr.clone(), Relation::Eq, ProbExpr::Const(Rational::zero()));
    table.label(pc, &holder)?;
    (0..pc.state_count())
        .map(|s| Ok((tuple_key(pc, s), format_rational(&eval_prob_expr(table, &expr, s)?))))
        .collect()
}

/// Checks a parsed sentence against `m`.
pub fn check_formula(
    m: &Dtmc,
    sentence: &StateFormula,
    options: &CheckOptions,
) -> Result<Verdict, CheckError> {
    let violations = m.validate();
    if !violations.is_empty() {
        return Err(ModelError::Invalid(violations).into());
    }
    let info = check_sentence(&desugar(sentence))?;
    let pc = product_for(m, &info, options.budget)?;
    let mut table = label_all(&pc, &info)?;
    let top = table.child(&info.formula)?;
    let satisfied = top.all();
    if !satisfied && !top.none() {
        return Err(CheckError::Internal(
            "sentence vector is neither all-true nor all-false".into(),
        ));
    }
    let (witness, counterexample) = if satisfied {
        (extract_witness(&pc, &table, &info, QuantifierKind::Exists, true)?, Vec::new())
    } else {
        (Vec::new(), extract_witness(&pc, &table, &info, QuantifierKind::Forall, false)?)
    };
    let mut probes = BTreeMap::new();
    for probe in &options.probes {
        let values = run_probe(&pc, &mut table, &info, probe)?;
        probes.insert(probe.clone(), values);
    }
    Ok(Verdict {
        satisfied,
        witness,
        counterexample,
        probes,
    })
}

/// Parses and checks `sentence` against `m` with default options.
pub fn check(m: &Dtmc, sentence: &str) -> Result<Verdict, CheckError> {
    check_with(m, sentence, &CheckOptions::default())
}

pub fn check_with(m: &Dtmc, sentence: &str, options: &CheckOptions) -> Result<Verdict, CheckError> {
    check_formula(m, &parse_formula(sentence)?, options)
}
