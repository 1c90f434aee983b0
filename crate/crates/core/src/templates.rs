//! Ready-made hyperproperty sentences: bisimulation, noninterference,
//! quantitative information flow, differential privacy, causation.
//!
//! Templates quantify over `s` and `t` (and `u` for screened causation).

use std::collections::BTreeSet;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::formula::{PathFormula, ProbExpr, Relation, StateFormula};
use crate::model::{is_valid_proposition, Dtmc, ModelError, StateIndex};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TemplateError {
    #[error("state {0} appears in more than one block")]
    Overlap(StateIndex),
    #[error("state {0} is not covered by any block")]
    Uncovered(StateIndex),
    #[error("state {state} is out of range (model has {state_count} states)")]
    OutOfRange { state: StateIndex, state_count: usize },
    #[error("partition has an empty block")]
    EmptyBlock,
    #[error("partition covers {found} states but the model has {expected}")]
    SizeMismatch { expected: usize, found: usize },
    #[error("block proposition `{0}` already occurs in the model")]
    NameCollision(String),
    #[error("`{0}` is not a valid proposition name")]
    InvalidName(String),
    #[error("at least one low proposition is required")]
    NoLowProps,
    #[error("factor must be positive")]
    NonPositiveFactor,
    #[error("cause and effect must differ")]
    SameCauseAndEffect,
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Disjoint blocks of states covering the whole state space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    blocks: Vec<Vec<StateIndex>>,
    block_of: Vec<usize>,
}

impl Partition {
    pub fn new(blocks: Vec<Vec<StateIndex>>, state_count: usize) -> Result<Self, TemplateError> {
        let mut block_of = vec![usize::MAX; state_count];
        let mut blocks = blocks;
        for (b, block) in blocks.iter_mut().enumerate() {
            if block.is_empty() {
                return Err(TemplateError::EmptyBlock);
            }
            block.sort_unstable();
            for &s in block.iter() {
                if s >= state_count {
                    return Err(TemplateError::OutOfRange { state: s, state_count });
                }
                if block_of[s] != usize::MAX {
                    return Err(TemplateError::Overlap(s));
                }
                block_of[s] = b;
            }
        }
        if let Some(s) = block_of.iter().position(|&b| b == usize::MAX) {
            return Err(TemplateError::Uncovered(s));
        }
        Ok(Partition { blocks, block_of })
    }

    /// Builds the partition from a block index per state.
    pub fn from_assignment(assignment: &[usize]) -> Result<Self, TemplateError> {
        let count = assignment.iter().map(|b| b + 1).max().unwrap_or(0);
        let mut blocks = vec![Vec::new(); count];
        for (s, &b) in assignment.iter().enumerate() {
            blocks[b].push(s);
        }
        blocks.retain(|b| !b.is_empty());
        Partition::new(blocks, assignment.len())
    }

    /// Singletons.
    pub fn discrete(state_count: usize) -> Self {
        Partition::new((0..state_count).map(|s| vec![s]).collect(), state_count)
            .expect("singletons partition")
    }

    pub fn blocks(&self) -> &[Vec<StateIndex>] {
        &self.blocks
    }

    pub fn block_of(&self, state: StateIndex) -> usize {
        self.block_of[state]
    }

    pub fn state_count(&self) -> usize {
        self.block_of.len()
    }
}

/// Which shape of bisimulation sentence to emit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BisimulationForm {
    /// Inside the `G`, the one-step block probabilities are compared only at
    /// product states whose components share a block. Holds exactly when the
    /// partition is a probabilistic bisimulation.
    #[default]
    Exact,
    /// Compares one-step block probabilities at every reachable product
    /// state. Sufficient for bisimulation but fails on most bisimulations
    /// whose blocks are not all mutually equivalent.
    Strict,
}

fn atom(prop: &str, var: &str) -> StateFormula {
    StateFormula::atom(prop, var)
}

fn prob(path: PathFormula) -> ProbExpr {
    ProbExpr::prob(path)
}

fn next(prop: &str, var: &str) -> ProbExpr {
    prob(PathFormula::Next(atom(prop, var)))
}

fn eventually(prop: &str, var: &str) -> ProbExpr {
    prob(PathFormula::Eventually(atom(prop, var)))
}

fn equal(l: ProbExpr, r: ProbExpr) -> StateFormula {
    StateFormula::compare(l, Relation::Eq, r)
}

fn almost_surely_globally(f: StateFormula) -> StateFormula {
    equal(
        prob(PathFormula::Globally(f)),
        ProbExpr::constant(Rational::one()),
    )
}

fn forall2(body: StateFormula) -> StateFormula {
    StateFormula::forall("s", StateFormula::forall("t", body))
}

fn guarded(guard: Option<(&str, &str)>, body: StateFormula) -> StateFormula {
    match guard {
        Some((g, h)) => StateFormula::implies(StateFormula::and(atom(g, "s"), atom(h, "t")), body),
        None => body,
    }
}

fn check_name(name: &str) -> Result<(), TemplateError> {
    if is_valid_proposition(name) {
        Ok(())
    } else {
        Err(TemplateError::InvalidName(name.to_string()))
    }
}

/// Labels each state of block `i` (1-based) with `{prefix}{i}` and emits the
/// sentence that holds on the augmented chain iff the partition's relation
/// is a bisimulation (for [`BisimulationForm::Exact`]).
pub fn bisimulation(
    m: &Dtmc,
    partition: &Partition,
    prefix: &str,
    form: BisimulationForm,
) -> Result<(Dtmc, StateFormula), TemplateError> {
    if partition.state_count() != m.state_count() {
        return Err(TemplateError::SizeMismatch {
            expected: m.state_count(),
            found: partition.state_count(),
        });
    }
    let names: Vec<String> = (1..=partition.blocks().len())
        .map(|i| format!("{prefix}{i}"))
        .collect();
    for name in &names {
        check_name(name)?;
        if m.atomic_props().contains(name) {
            return Err(TemplateError::NameCollision(name.clone()));
        }
    }
    let augmented = m.with_extra_labels(
        (0..m.state_count()).map(|s| (s, names[partition.block_of(s)].clone())),
    )?;

    let same_labels = StateFormula::conjunction(
        m.atomic_props()
            .iter()
            .map(|a| StateFormula::iff(atom(a, "s"), atom(a, "t"))),
    );
    let block_steps = StateFormula::conjunction(
        names
            .iter()
            .map(|b| equal(next(b, "s"), next(b, "t"))),
    );
    let invariant = match form {
        BisimulationForm::Exact => StateFormula::implies(
            names
                .iter()
                .map(|b| StateFormula::and(atom(b, "s"), atom(b, "t")))
                .reduce(StateFormula::or)
                .unwrap_or(StateFormula::False),
            block_steps,
        ),
        BisimulationForm::Strict => block_steps,
    };
    let consequence = StateFormula::and(same_labels, almost_surely_globally(invariant));
    let body = StateFormula::conjunction(names.iter().map(|b| {
        StateFormula::implies(
            StateFormula::and(atom(b, "s"), atom(b, "t")),
            consequence.clone(),
        )
    }));
    Ok((augmented, forall2(body)))
}

/// Probabilistic noninterference for the low proposition `low`. Without a
/// guard the antecedent is `low@s & low@t`.
pub fn noninterference(low: &str, guard: Option<&str>) -> Result<StateFormula, TemplateError> {
    check_name(low)?;
    let antecedent = guard.unwrap_or(low);
    check_name(antecedent)?;
    Ok(forall2(StateFormula::implies(
        StateFormula::and(atom(antecedent, "s"), atom(antecedent, "t")),
        almost_surely_globally(equal(next(low, "s"), next(low, "t"))),
    )))
}

/// Every low output is reached with probability at most `bound`, and with the
/// same probability from every pair of (guarded) states.
pub fn qif(lows: &[&str], bound: &Rational, guard: Option<&str>) -> Result<StateFormula, TemplateError> {
    if lows.is_empty() {
        return Err(TemplateError::NoLowProps);
    }
    for l in lows.iter().copied().chain(guard) {
        check_name(l)?;
    }
    let bounded = StateFormula::conjunction(lows.iter().map(|l| {
        StateFormula::compare(
            eventually(l, "s"),
            Relation::Le,
            ProbExpr::constant(bound.clone()),
        )
    }));
    let same = StateFormula::conjunction(
        lows.iter()
            .map(|l| equal(eventually(l, "s"), eventually(l, "t"))),
    );
    Ok(forall2(guarded(
        guard.map(|g| (g, g)),
        StateFormula::and(bounded, same),
    )))
}

/// `(pre1@s & pre2@t) => P(F out@s) <= factor * P(F out@t)`, conjoined with
/// the same implication for `pre2`, `pre1`.
pub fn differential_privacy(
    factor: &Rational,
    pre: (&str, &str),
    out: &str,
) -> Result<StateFormula, TemplateError> {
    if *factor <= Rational::zero() {
        return Err(TemplateError::NonPositiveFactor);
    }
    for name in [pre.0, pre.1, out] {
        check_name(name)?;
    }
    let direction = |first: &str, second: &str| {
        StateFormula::implies(
            StateFormula::and(atom(first, "s"), atom(second, "t")),
            StateFormula::compare(
                eventually(out, "s"),
                Relation::Le,
                ProbExpr::mul(ProbExpr::constant(factor.clone()), eventually(out, "t")),
            ),
        )
    };
    Ok(forall2(StateFormula::and(
        direction(pre.0, pre.1),
        direction(pre.1, pre.0),
    )))
}

/// `P(c@s U e@s) > P(!c@t U e@t)` over all pairs, or over pairs with
/// `guard.0@s` and `guard.1@t`.
///
/// With `screening = Some(ap)` a third variable `u` is added and the sentence
/// becomes `forall s. forall t. forall u. !(cause_gap & screened)` where
/// `screened` requires `P((a@u & c@u) U e@u) = P(c@s U e@s)` for every `a` in
/// `ap` other than `c` and `e`.
pub fn causation(
    cause: &str,
    effect: &str,
    screening: Option<&BTreeSet<String>>,
    guard: Option<(&str, &str)>,
) -> Result<StateFormula, TemplateError> {
    if cause == effect {
        return Err(TemplateError::SameCauseAndEffect);
    }
    for name in [cause, effect]
        .into_iter()
        .chain(guard.into_iter().flat_map(|(g, h)| [g, h]))
    {
        check_name(name)?;
    }
    let with_cause = prob(PathFormula::Until(atom(cause, "s"), atom(effect, "s")));
    let gap = StateFormula::compare(
        with_cause.clone(),
        Relation::Gt,
        prob(PathFormula::Until(
            StateFormula::not(atom(cause, "t")),
            atom(effect, "t"),
        )),
    );
    let body = match screening {
        None => gap,
        Some(ap) => {
            let screens = StateFormula::conjunction(
                ap.iter()
                    .filter(|a| *a != cause && *a != effect)
                    .map(|a| {
                        equal(
                            prob(PathFormula::Until(
                                StateFormula::and(atom(a, "u"), atom(cause, "u")),
                                atom(effect, "u"),
                            )),
                            with_cause.clone(),
                        )
                    }),
            );
            StateFormula::forall("u", StateFormula::not(StateFormula::and(gap, screens)))
        }
    };
    Ok(forall2(guarded(guard, body)))
}
