//! Discrete-time Markov chains: representation, the text model format, and
//! validation.
//!
//! ```text
//! # comment
//! states: 3
//! transitions:
//! 0 1 1/2
//! 0 2 0.5
//! 1 1 1
//! 2 2 1
//! labels:
//! 1: goal l=1
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::rational::{format_rational, is_probability, parse_rational, Rational};

pub type StateIndex = usize;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: duplicate transition {from} -> {to}")]
    DuplicateTransition {
        line: usize,
        from: StateIndex,
        to: StateIndex,
    },
    #[error("line {line}: state {state} out of range (model has {state_count} states)")]
    UnknownState {
        line: usize,
        state: StateIndex,
        state_count: usize,
    },
    #[error("invalid proposition name `{0}`")]
    InvalidProposition(String),
    #[error("model is not a valid DTMC: {}", join_violations(.0))]
    Invalid(Vec<Violation>),
}

fn join_violations(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

/// A single way in which a chain fails to be a DTMC.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    RowSum { state: StateIndex, sum: Rational },
    ProbabilityOutOfRange {
        source: StateIndex,
        target: StateIndex,
        probability: Rational,
    },
    UnknownLabel { state: StateIndex, proposition: String },
    NoStates,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::RowSum { state, sum } => write!(
                f,
                "row {state} sums to {} instead of 1",
                format_rational(sum)
            ),
            Violation::ProbabilityOutOfRange {
                source,
                target,
                probability,
            } => write!(
                f,
                "transition {source} -> {target} has probability {} outside (0, 1]",
                format_rational(probability)
            ),
            Violation::UnknownLabel { state, proposition } => write!(
                f,
                "state {state} is labeled with undeclared proposition `{proposition}`"
            ),
            Violation::NoStates => write!(f, "the state set is empty"),
        }
    }
}

/// Proposition names are `[A-Za-z_][A-Za-z0-9_=.]*`, so `l=1` is one atom.
pub fn is_valid_proposition(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '=' | '.'))
}

/// A finite DTMC with exact transition probabilities.
///
/// Rows are sparse and sorted by target. Construction checks structural
/// well-formedness (indices, duplicates); stochasticity is checked by
/// [`Dtmc::validate`], which [`parse_model`] runs before returning.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dtmc {
    rows: Vec<Vec<(StateIndex, Rational)>>,
    atomic_props: BTreeSet<String>,
    labels: Vec<BTreeSet<String>>,
}

impl Dtmc {
    /// Builds a chain whose atomic propositions are exactly the ones used in
    /// `labels`.
    pub fn new(
        state_count: usize,
        transitions: impl IntoIterator<Item = (StateIndex, StateIndex, Rational)>,
        labels: impl IntoIterator<Item = (StateIndex, String)>,
    ) -> Result<Self, ModelError> {
        let labels: Vec<_> = labels.into_iter().collect();
        let props = labels.iter().map(|(_, p)| p.clone()).collect();
        Self::with_props(state_count, transitions, labels, props)
    }

    /// Like [`Dtmc::new`] but with an explicit proposition set. Labels outside
    /// `atomic_props` are kept and reported by [`Dtmc::validate`].
    pub fn with_props(
        state_count: usize,
        transitions: impl IntoIterator<Item = (StateIndex, StateIndex, Rational)>,
        labels: impl IntoIterator<Item = (StateIndex, String)>,
        atomic_props: BTreeSet<String>,
    ) -> Result<Self, ModelError> {
        let mut rows: Vec<BTreeMap<StateIndex, Rational>> = vec![BTreeMap::new(); state_count];
        let check = |state: StateIndex| {
            if state >= state_count {
                Err(ModelError::UnknownState {
                    line: 0,
                    state,
                    state_count,
                })
            } else {
                Ok(())
            }
        };
        for (source, target, probability) in transitions {
            check(source)?;
            check(target)?;
            if rows[source].insert(target, probability).is_some() {
                return Err(ModelError::DuplicateTransition {
                    line: 0,
                    from: source,
                    to: target,
                });
            }
        }
        let mut state_labels = vec![BTreeSet::new(); state_count];
        for (state, prop) in labels {
            check(state)?;
            if !is_valid_proposition(&prop) {
                return Err(ModelError::InvalidProposition(prop));
            }
            state_labels[state].insert(prop);
        }
        for prop in &atomic_props {
            if !is_valid_proposition(prop) {
                return Err(ModelError::InvalidProposition(prop.clone()));
            }
        }
        Ok(Dtmc {
            rows: rows.into_iter().map(|r| r.into_iter().collect()).collect(),
            atomic_props,
            labels: state_labels,
        })
    }

    pub fn state_count(&self) -> usize {
        self.rows.len()
    }

    pub fn successors(&self, state: StateIndex) -> &[(StateIndex, Rational)] {
        &self.rows[state]
    }

    pub fn transitions(&self) -> impl Iterator<Item = (StateIndex, StateIndex, &Rational)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(s, row)| row.iter().map(move |(t, p)| (s, *t, p)))
    }

    /// Probability of the single step `source -> target` (zero when absent).
    pub fn probability(&self, source: StateIndex, target: StateIndex) -> Rational {
        self.rows[source]
            .binary_search_by_key(&target, |(t, _)| *t)
            .map(|i| self.rows[source][i].1.clone())
            .unwrap_or_else(|_| Rational::zero())
    }

    pub fn atomic_props(&self) -> &BTreeSet<String> {
        &self.atomic_props
    }

    pub fn labels(&self, state: StateIndex) -> &BTreeSet<String> {
        &self.labels[state]
    }

    pub fn has_label(&self, state: StateIndex, prop: &str) -> bool {
        self.labels[state].contains(prop)
    }

    /// States carrying `prop`, in increasing order.
    pub fn states_with(&self, prop: &str) -> Vec<StateIndex> {
        (0..self.state_count())
            .filter(|&s| self.has_label(s, prop))
            .collect()
    }

    /// Returns a copy with extra labels and their propositions added.
    pub fn with_extra_labels(
        &self,
        extra: impl IntoIterator<Item = (StateIndex, String)>,
    ) -> Result<Dtmc, ModelError> {
        let mut props = self.atomic_props.clone();
        let mut labels: Vec<(StateIndex, String)> = (0..self.state_count())
            .flat_map(|s| self.labels[s].iter().map(move |p| (s, p.clone())))
            .collect();
        for (state, prop) in extra {
            props.insert(prop.clone());
            labels.push((state, prop));
        }
        Dtmc::with_props(
            self.state_count(),
            self.transitions().map(|(s, t, p)| (s, t, p.clone())),
            labels,
            props,
        )
    }

    /// Every violation of the DTMC conditions, in state order. Empty means
    /// the chain is valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut violations = Vec::new();
        if self.rows.is_empty() {
            violations.push(Violation::NoStates);
        }
        for (state, row) in self.rows.iter().enumerate() {
            let mut sum = Rational::zero();
            for (target, probability) in row {
                if probability.is_zero() || !is_probability(probability) {
                    violations.push(Violation::ProbabilityOutOfRange {
                        source: state,
                        target: *target,
                        probability: probability.clone(),
                    });
                }
                sum += probability;
            }
            if !sum.is_one() {
                violations.push(Violation::RowSum { state, sum });
            }
            for prop in &self.labels[state] {
                if !self.atomic_props.contains(prop) {
                    violations.push(Violation::UnknownLabel {
                        state,
                        proposition: prop.clone(),
                    });
                }
            }
        }
        violations
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_empty()
    }

    /// Canonical model-file text; [`parse_model`] reads it back unchanged.
    pub fn to_model_string(&self) -> String {
        let mut out = format!("states: {}\ntransitions:\n", self.state_count());
        for (s, t, p) in self.transitions() {
            out.push_str(&format!("{s} {t} {}\n", format_rational(p)));
        }
        out.push_str("labels:\n");
        for (state, labels) in self.labels.iter().enumerate() {
            if !labels.is_empty() {
                let names: Vec<&str> = labels.iter().map(String::as_str).collect();
                out.push_str(&format!("{state}: {}\n", names.join(" ")));
            }
        }
        out
    }
}

impl fmt::Display for Dtmc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_model_string())
    }
}

#[derive(PartialEq)]
enum Section {
    Preamble,
    Transitions,
    Labels,
}

fn syntax(line: usize, message: impl Into<String>) -> ModelError {
    ModelError::Syntax {
        line,
        message: message.into(),
    }
}

fn parse_index(line: usize, text: &str, state_count: usize) -> Result<StateIndex, ModelError> {
    let state: StateIndex = text
        .parse()
        .map_err(|_| syntax(line, format!("expected a state index, found `{text}`")))?;
    if state >= state_count {
        return Err(ModelError::UnknownState {
            line,
            state,
            state_count,
        });
    }
    Ok(state)
}

/// Parses the model format without checking stochasticity.
pub fn parse_model_unchecked(text: &str) -> Result<Dtmc, ModelError> {
    let mut state_count: Option<usize> = None;
    let mut section = Section::Preamble;
    let mut rows: Vec<BTreeMap<StateIndex, Rational>> = Vec::new();
    let mut labels: Vec<(StateIndex, String)> = Vec::new();

    for (number, raw) in text.lines().enumerate() {
        let line = number + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix("states:") {
            if state_count.is_some() {
                return Err(syntax(line, "`states:` given twice"));
            }
            let n: usize = rest
                .trim()
                .parse()
                .map_err(|_| syntax(line, "expected `states: N`"))?;
            if n == 0 {
                return Err(syntax(line, "a DTMC needs at least one state"));
            }
            state_count = Some(n);
            rows = vec![BTreeMap::new(); n];
            continue;
        }
        if content == "transitions:" || content == "labels:" {
            if state_count.is_none() {
                return Err(syntax(line, "`states: N` must come first"));
            }
            section = if content == "labels:" {
                Section::Labels
            } else {
                Section::Transitions
            };
            continue;
        }
        let n = match (&section, state_count) {
            (Section::Preamble, _) | (_, None) => {
                return Err(syntax(line, format!("unexpected line `{content}`")))
            }
            (_, Some(n)) => n,
        };
        match section {
            Section::Transitions => {
                let fields: Vec<&str> = content.split_whitespace().collect();
                let [src, dst, prob] = fields[..] else {
                    return Err(syntax(line, "expected `SRC DST PROB`"));
                };
                let source = parse_index(line, src, n)?;
                let target = parse_index(line, dst, n)?;
                let probability =
                    parse_rational(prob).map_err(|e| syntax(line, e.to_string()))?;
                if rows[source].insert(target, probability).is_some() {
                    return Err(ModelError::DuplicateTransition {
                        line,
                        from: source,
                        to: target,
                    });
                }
            }
            Section::Labels => {
                let (state, names) = content
                    .split_once(':')
                    .ok_or_else(|| syntax(line, "expected `STATE: name ...`"))?;
                let state = parse_index(line, state.trim(), n)?;
                for name in names.split_whitespace() {
                    if !is_valid_proposition(name) {
                        return Err(syntax(line, format!("invalid proposition name `{name}`")));
                    }
                    labels.push((state, name.to_string()));
                }
            }
            Section::Preamble => unreachable!(),
        }
    }

    let n = state_count.ok_or_else(|| syntax(1, "missing `states: N`"))?;
    let transitions = rows
        .into_iter()
        .enumerate()
        .flat_map(|(s, row)| row.into_iter().map(move |(t, p)| (s, t, p)));
    Dtmc::new(n, transitions, labels)
}

/// Parses and validates a model file.
pub fn parse_model(text: &str) -> Result<Dtmc, ModelError> {
    let dtmc = parse_model_unchecked(text)?;
    let violations = dtmc.validate();
    if violations.is_empty() {
        Ok(dtmc)
    } else {
        Err(ModelError::Invalid(violations))
    }
}

/// The two-state chain with absorbing `s0` (labeled `a`) and `s1`.
pub fn two_state_fixture() -> Dtmc {
    Dtmc::new(
        2,
        [
            (0, 0, Rational::one()),
            (1, 1, Rational::one()),
        ],
        [(0, "a".to_string())],
    )
    .expect("static chain")
}
