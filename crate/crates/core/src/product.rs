//! The n-ary self-composition of a DTMC.
//!
//! Product states are n-tuples of base states, encoded mixed-radix with
//! component 1 as the most significant digit: over a 2-state base, `(1, 0)`
//! is index 2.

use num_traits::One;
use thiserror::Error;

use crate::model::{Dtmc, StateIndex};
use crate::rational::Rational;

/// Default cap on product states.
pub const DEFAULT_STATE_BUDGET: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProductError {
    #[error("self-composition needs {required} product states, budget is {budget}")]
    BudgetExceeded { required: String, budget: usize },
    #[error("self-composition arity must be at least 1")]
    ZeroArity,
    #[error("tuple component {component} = {value} is not a state of the base chain ({state_count} states)")]
    ComponentOutOfRange {
        component: usize,
        value: StateIndex,
        state_count: usize,
    },
    #[error("tuple has {found} components, expected {expected}")]
    WrongArity { expected: usize, found: usize },
    #[error("product index {index} out of range")]
    IndexOutOfRange { index: usize },
}

/// Mixed-radix encoding of a tuple of base states.
pub fn encode_index(tuple: &[StateIndex], state_count: usize) -> Result<usize, ProductError> {
    let mut index = 0usize;
    for (i, &value) in tuple.iter().enumerate() {
        if value >= state_count {
            return Err(ProductError::ComponentOutOfRange {
                component: i + 1,
                value,
                state_count,
            });
        }
        index = index
            .checked_mul(state_count)
            .and_then(|x| x.checked_add(value))
            .ok_or(ProductError::IndexOutOfRange { index: usize::MAX })?;
    }
    Ok(index)
}

/// Inverse of [`encode_index`] for tuples of length `arity`.
pub fn decode_index(
    index: usize,
    arity: usize,
    state_count: usize,
) -> Result<Vec<StateIndex>, ProductError> {
    let mut tuple = vec![0; arity];
    let mut rest = index;
    for slot in tuple.iter_mut().rev() {
        *slot = rest % state_count;
        rest /= state_count;
    }
    if rest != 0 {
        return Err(ProductError::IndexOutOfRange { index });
    }
    Ok(tuple)
}

fn product_size(state_count: usize, arity: usize) -> Option<usize> {
    (0..arity).try_fold(1usize, |acc, _| acc.checked_mul(state_count))
}

/// The chain `M^n` with materialized sparse rows.
#[derive(Debug, Clone)]
pub struct ProductChain {
    base: Dtmc,
    arity: usize,
    state_count: usize,
    offsets: Vec<usize>,
    targets: Vec<usize>,
    probabilities: Vec<Rational>,
}

impl ProductChain {
    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn base(&self) -> &Dtmc {
        &self.base
    }

    pub fn state_count(&self) -> usize {
        self.state_count
    }

    pub fn transition_count(&self) -> usize {
        self.targets.len()
    }

    /// Successors of a product state as `(target, probability)` pairs, sorted
    /// by target.
    pub fn successors(&self, state: usize) -> impl Iterator<Item = (usize, &Rational)> + '_ {
        let range = self.offsets[state]..self.offsets[state + 1];
        self.targets[range.clone()]
            .iter()
            .copied()
            .zip(&self.probabilities[range])
    }

    pub fn out_degree(&self, state: usize) -> usize {
        self.offsets[state + 1] - self.offsets[state]
    }

    /// Stride of component `i` (1-based) in the mixed-radix encoding.
    pub fn stride(&self, component: usize) -> usize {
        debug_assert!(component >= 1 && component <= self.arity);
        self.base.state_count().pow((self.arity - component) as u32)
    }

    /// The `i`-th (1-based) base state of a product state.
    pub fn component(&self, state: usize, component: usize) -> StateIndex {
        (state / self.stride(component)) % self.base.state_count()
    }

    pub fn decode(&self, state: usize) -> Vec<StateIndex> {
        decode_index(state, self.arity, self.base.state_count()).expect("index in range")
    }

    pub fn encode(&self, tuple: &[StateIndex]) -> Result<usize, ProductError> {
        if tuple.len() != self.arity {
            return Err(ProductError::WrongArity {
                expected: self.arity,
                found: tuple.len(),
            });
        }
        encode_index(tuple, self.base.state_count())
    }

    /// Whether the indexed proposition `prop_i` holds at a product state.
    pub fn has_label(&self, state: usize, prop: &str, component: usize) -> bool {
        component >= 1
            && component <= self.arity
            && self.base.has_label(self.component(state, component), prop)
    }

    /// Indexed labels `a_i` of a product state.
    pub fn labels(&self, state: usize) -> Vec<String> {
        (1..=self.arity)
            .flat_map(|i| {
                self.base
                    .labels(self.component(state, i))
                    .iter()
                    .map(move |a| format!("{a}_{i}"))
            })
            .collect()
    }

    /// The zero-ary composition: one state, looping with probability 1.
    pub fn unit(base: &Dtmc) -> ProductChain {
        ProductChain {
            base: base.clone(),
            arity: 0,
            state_count: 1,
            offsets: vec![0, 1],
            targets: vec![0],
            probabilities: vec![Rational::one()],
        }
    }

    /// Materializes the product as an ordinary [`Dtmc`] with indexed labels.
    pub fn to_dtmc(&self) -> Dtmc {
        let transitions = (0..self.state_count)
            .flat_map(|s| self.successors(s).map(move |(t, p)| (s, t, p.clone())));
        let labels = (0..self.state_count).flat_map(|s| self.labels(s).into_iter().map(move |l| (s, l)));
        Dtmc::new(self.state_count, transitions, labels).expect("product is well formed")
    }
}

/// Builds `M^n`, refusing when `|S|^n` exceeds `budget`.
pub fn self_compose(base: &Dtmc, arity: usize, budget: usize) -> Result<ProductChain, ProductError> {
    if arity == 0 {
        return Err(ProductError::ZeroArity);
    }
    let n = base.state_count();
    let state_count = match product_size(n, arity) {
        Some(size) if size <= budget => size,
        _ => {
            return Err(ProductError::BudgetExceeded {
                required: format!("{n}^{arity}"),
                budget,
            })
        }
    };

    let mut offsets = Vec::with_capacity(state_count + 1);
    let mut targets = Vec::new();
    let mut probabilities = Vec::new();
    offsets.push(0);
    let mut tuple = vec![0usize; arity];
    // Odometer over choices of successor in each component row; component 1
    // is most significant, so targets come out sorted.
    let mut choice = vec![0usize; arity];
    for _ in 0..state_count {
        let rows: Vec<&[(StateIndex, Rational)]> = tuple.iter().map(|&s| base.successors(s)).collect();
        if rows.iter().all(|r| !r.is_empty()) {
            choice.iter_mut().for_each(|c| *c = 0);
            'successors: loop {
                let mut target = 0usize;
                let mut probability = Rational::one();
                for (row, &c) in rows.iter().zip(&choice) {
                    target = target * n + row[c].0;
                    probability *= &row[c].1;
                }
                targets.push(target);
                probabilities.push(probability);
                for k in (0..arity).rev() {
                    choice[k] += 1;
                    if choice[k] < rows[k].len() {
                        continue 'successors;
                    }
                    choice[k] = 0;
                }
                break;
            }
        }
        offsets.push(targets.len());
        // Advance the source tuple.
        for slot in tuple.iter_mut().rev() {
            *slot += 1;
            if *slot < n {
                break;
            }
            *slot = 0;
        }
    }

    Ok(ProductChain {
        base: base.clone(),
        arity,
        state_count,
        offsets,
        targets,
        probabilities,
    })
}
