//! Exact probabilities of path formulas over a product chain.
//!
//! Unbounded until first settles the states with probability exactly 0 and
//! exactly 1 by graph search, then solves the remaining states' linear system.
//! Bounded until is a step-indexed recurrence.

pub mod linear;

use std::ops::Index;

use bitvec::prelude::*;
use num_traits::{One, Zero};
use rayon::prelude::*;

pub use linear::{solve_linear_exact, SolveError, SparseMatrix};

use crate::product::ProductChain;
use crate::rational::Rational;

/// One bit per product state.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SatVector(BitVec);

impl SatVector {
    pub fn empty(len: usize) -> Self {
        SatVector(bitvec![0; len])
    }

    pub fn full(len: usize) -> Self {
        SatVector(bitvec![1; len])
    }

    pub fn from_fn(len: usize, f: impl Fn(usize) -> bool) -> Self {
        SatVector((0..len).map(f).collect())
    }

    pub fn from_states(len: usize, states: impl IntoIterator<Item = usize>) -> Self {
        let mut v = Self::empty(len);
        for s in states {
            v.set(s, true);
        }
        v
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, state: usize) -> bool {
        self.0[state]
    }

    pub fn set(&mut self, state: usize, value: bool) {
        self.0.set(state, value);
    }

    pub fn count(&self) -> usize {
        self.0.count_ones()
    }

    pub fn all(&self) -> bool {
        self.0.all()
    }

    pub fn none(&self) -> bool {
        self.0.not_any()
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter_ones()
    }

    pub fn and(&self, other: &SatVector) -> SatVector {
        SatVector(self.0.clone() & &other.0)
    }

    pub fn complement(&self) -> SatVector {
        SatVector(!self.0.clone())
    }

    /// Pointwise `self ⊆ other`.
    pub fn is_subset(&self, other: &SatVector) -> bool {
        self.ones().all(|s| other.get(s))
    }
}

/// One exact probability per product state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProbVector(Vec<Rational>);

impl ProbVector {
    pub fn new(values: Vec<Rational>) -> Self {
        ProbVector(values)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[Rational] {
        &self.0
    }

    pub fn into_values(self) -> Vec<Rational> {
        self.0
    }
}

impl Index<usize> for ProbVector {
    type Output = Rational;

    fn index(&self, state: usize) -> &Rational {
        &self.0[state]
    }
}

fn one_step(pc: &ProductChain, state: usize, x: &[Rational]) -> Rational {
    pc.successors(state)
        .filter(|(t, _)| !x[*t].is_zero())
        .fold(Rational::zero(), |acc, (t, p)| acc + p * &x[t])
}

/// `P(X target)` at every state.
pub fn prob_next(pc: &ProductChain, target: &SatVector) -> ProbVector {
    debug_assert_eq!(target.len(), pc.state_count());
    ProbVector(
        (0..pc.state_count())
            .into_par_iter()
            .map(|s| {
                pc.successors(s)
                    .filter(|(t, _)| target.get(*t))
                    .fold(Rational::zero(), |acc, (_, p)| acc + p)
            })
            .collect(),
    )
}

fn predecessors(pc: &ProductChain) -> Vec<Vec<usize>> {
    let mut preds = vec![Vec::new(); pc.state_count()];
    for s in 0..pc.state_count() {
        for (t, _) in pc.successors(s) {
            preds[t].push(s);
        }
    }
    preds
}

/// Backward closure of `seed` through states allowed by `through`.
fn backward_closure(preds: &[Vec<usize>], seed: &SatVector, through: &SatVector) -> SatVector {
    let mut reached = seed.clone();
    let mut frontier: Vec<usize> = seed.ones().collect();
    while let Some(t) = frontier.pop() {
        for &s in &preds[t] {
            if !reached.get(s) && through.get(s) {
                reached.set(s, true);
                frontier.push(s);
            }
        }
    }
    reached
}

/// States where `sat1 U sat2` has probability exactly 0 and exactly 1.
pub fn prob01(pc: &ProductChain, sat1: &SatVector, sat2: &SatVector) -> (SatVector, SatVector) {
    let preds = predecessors(pc);
    let can_reach = backward_closure(&preds, sat2, sat1);
    let prob0 = can_reach.complement();
    let transient = sat1.and(&sat2.complement());
    let can_fail = backward_closure(&preds, &prob0, &transient);
    (prob0, can_fail.complement())
}

/// `P(sat1 U sat2)` at every state.
pub fn prob_until_unbounded(
    pc: &ProductChain,
    sat1: &SatVector,
    sat2: &SatVector,
) -> Result<ProbVector, SolveError> {
    let n = pc.state_count();
    let (prob0, prob1) = prob01(pc, sat1, sat2);
    let mut result: Vec<Rational> = (0..n)
        .map(|s| {
            if prob1.get(s) {
                Rational::one()
            } else {
                Rational::zero()
            }
        })
        .collect();

    let maybe: Vec<usize> = (0..n).filter(|&s| !prob0.get(s) && !prob1.get(s)).collect();
    if maybe.is_empty() {
        return Ok(ProbVector(result));
    }
    let mut local = vec![usize::MAX; n];
    for (i, &s) in maybe.iter().enumerate() {
        local[s] = i;
    }
    let mut a = SparseMatrix::new(maybe.len());
    let mut b = vec![Rational::zero(); maybe.len()];
    for (i, &s) in maybe.iter().enumerate() {
        for (t, p) in pc.successors(s) {
            if prob1.get(t) {
                b[i] += p;
            } else if local[t] != usize::MAX {
                a.push(i, local[t], p.clone());
            }
        }
    }
    let x = solve_linear_exact(&a, &b)?;
    for (&s, value) in maybe.iter().zip(x) {
        result[s] = value;
    }
    Ok(ProbVector(result))
}

/// `P(sat1 U[k1,k2] sat2)` at every state. Requires `k1 <= k2`.
///
/// The window `[0, k2 - k1]` is computed first; then `k1` steps that must
/// stay inside `sat1` are prepended.
pub fn prob_until_bounded(
    pc: &ProductChain,
    sat1: &SatVector,
    sat2: &SatVector,
    k1: u64,
    k2: u64,
) -> ProbVector {
    assert!(k1 <= k2, "bounded until with k1 > k2");
    let n = pc.state_count();
    let indicator = |v: &SatVector, s: usize| {
        if v.get(s) {
            Rational::one()
        } else {
            Rational::zero()
        }
    };
    let mut x: Vec<Rational> = (0..n).map(|s| indicator(sat2, s)).collect();
    for _ in 0..(k2 - k1) {
        x = (0..n)
            .into_par_iter()
            .map(|s| {
                if sat2.get(s) {
                    Rational::one()
                } else if sat1.get(s) {
                    one_step(pc, s, &x)
                } else {
                    Rational::zero()
                }
            })
            .collect();
    }
    for _ in 0..k1 {
        x = (0..n)
            .into_par_iter()
            .map(|s| {
                if sat1.get(s) {
                    one_step(pc, s, &x)
                } else {
                    Rational::zero()
                }
            })
            .collect();
    }
    ProbVector(x)
}
