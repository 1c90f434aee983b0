//! Exact solution of `x = A x + b` over the rationals.
//!
//! The dependency graph of `A` is split into strongly connected components,
//! which are solved sinks-first; each component is a dense system reduced by
//! Gaussian elimination. Pivots are chosen among the nonzero candidates of the
//! column with the smallest bit size, which keeps intermediate values short.

use num_traits::{One, Zero};
use thiserror::Error;

use crate::rational::{bit_size, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error("linear system is singular (variable {variable} has no pivot)")]
    Singular { variable: usize },
    #[error("dimension mismatch: matrix has {rows} rows, vector has {len} entries")]
    Dimension { rows: usize, len: usize },
}

/// Square sparse matrix stored by rows; each row is `(column, value)` pairs
/// with distinct columns.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SparseMatrix {
    rows: Vec<Vec<(usize, Rational)>>,
}

impl SparseMatrix {
    pub fn new(dimension: usize) -> Self {
        SparseMatrix {
            rows: vec![Vec::new(); dimension],
        }
    }

    pub fn from_rows(rows: Vec<Vec<(usize, Rational)>>) -> Self {
        SparseMatrix { rows }
    }

    pub fn dimension(&self) -> usize {
        self.rows.len()
    }

    /// Appends an entry; zero values are dropped.
    pub fn push(&mut self, row: usize, column: usize, value: Rational) {
        if !value.is_zero() {
            self.rows[row].push((column, value));
        }
    }

    pub fn row(&self, row: usize) -> &[(usize, Rational)] {
        &self.rows[row]
    }

    /// `A x`
    pub fn multiply(&self, x: &[Rational]) -> Vec<Rational> {
        self.rows
            .iter()
            .map(|row| {
                row.iter()
                    .fold(Rational::zero(), |acc, (j, a)| acc + a * &x[*j])
            })
            .collect()
    }
}

/// Solves `x = A x + b` exactly. `I - A` must be nonsingular.
pub fn solve_linear_exact(a: &SparseMatrix, b: &[Rational]) -> Result<Vec<Rational>, SolveError> {
    let n = a.dimension();
    if b.len() != n {
        return Err(SolveError::Dimension { rows: n, len: b.len() });
    }
    let mut x: Vec<Option<Rational>> = vec![None; n];
    for component in strongly_connected_components(a) {
        solve_component(a, b, &component, &mut x)?;
    }
    Ok(x.into_iter().map(|v| v.expect("every variable solved")).collect())
}

fn solve_component(
    a: &SparseMatrix,
    b: &[Rational],
    component: &[usize],
    x: &mut [Option<Rational>],
) -> Result<(), SolveError> {
    // Right-hand side with already-solved variables substituted.
    let known = |i: usize, x: &[Option<Rational>]| {
        a.row(i).iter().fold(b[i].clone(), |acc, (j, value)| match &x[*j] {
            Some(xj) => acc + value * xj,
            None => acc,
        })
    };

    if let [i] = component {
        let i = *i;
        let rhs = known(i, x);
        let diagonal = a
            .row(i)
            .iter()
            .find(|(j, _)| *j == i)
            .map(|(_, v)| Rational::one() - v)
            .unwrap_or_else(Rational::one);
        if diagonal.is_zero() {
            return Err(SolveError::Singular { variable: i });
        }
        x[i] = Some(rhs / diagonal);
        return Ok(());
    }

    let k = component.len();
    let local: std::collections::HashMap<usize, usize> =
        component.iter().enumerate().map(|(l, &g)| (g, l)).collect();
    // Augmented dense matrix [I - A_CC | rhs].
    let mut m: Vec<Vec<Rational>> = Vec::with_capacity(k);
    for &g in component {
        let mut row = vec![Rational::zero(); k + 1];
        row[local[&g]] = Rational::one();
        for (j, value) in a.row(g) {
            if let Some(&l) = local.get(j) {
                row[l] -= value;
            }
        }
        row[k] = known(g, x);
        m.push(row);
    }

    for col in 0..k {
        let pivot = (col..k)
            .filter(|&r| !m[r][col].is_zero())
            .min_by_key(|&r| bit_size(&m[r][col]))
            .ok_or(SolveError::Singular {
                variable: component[col],
            })?;
        m.swap(col, pivot);
        let inv = Rational::one() / &m[col][col];
        for entry in m[col][col..].iter_mut() {
            *entry *= &inv;
        }
        let pivot_row = m[col].clone();
        for (r, row) in m.iter_mut().enumerate() {
            if r == col || row[col].is_zero() {
                continue;
            }
            let factor = row[col].clone();
            for c in col..=k {
                if !pivot_row[c].is_zero() {
                    row[c] -= &factor * &pivot_row[c];
                }
            }
        }
    }
    for (l, &g) in component.iter().enumerate() {
        x[g] = Some(m[l][k].clone());
    }
    Ok(())
}

/// Tarjan's algorithm, iterative. Components come out sinks first.
fn strongly_connected_components(a: &SparseMatrix) -> Vec<Vec<usize>> {
    const UNVISITED: usize = usize::MAX;
    let n = a.dimension();
    let mut index = vec![UNVISITED; n];
    let mut lowlink = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut components = Vec::new();
    let mut next_index = 0usize;
    // (node, position in its adjacency list)
    let mut call: Vec<(usize, usize)> = Vec::new();

    for root in 0..n {
        if index[root] != UNVISITED {
            continue;
        }
        call.push((root, 0));
        while let Some(&(v, pos)) = call.last() {
            if pos == 0 && index[v] == UNVISITED {
                index[v] = next_index;
                lowlink[v] = next_index;
                next_index += 1;
                stack.push(v);
                on_stack[v] = true;
            }
            let row = a.row(v);
            if pos < row.len() {
                let w = row[pos].0;
                call.last_mut().expect("nonempty").1 += 1;
                if index[w] == UNVISITED {
                    call.push((w, 0));
                } else if on_stack[w] {
                    lowlink[v] = lowlink[v].min(index[w]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                lowlink[parent] = lowlink[parent].min(lowlink[v]);
            }
            if lowlink[v] == index[v] {
                let mut component = Vec::new();
                loop {
                    let w = stack.pop().expect("tarjan stack");
                    on_stack[w] = false;
                    component.push(w);
                    if w == v {
                        break;
                    }
                }
                component.sort_unstable();
                components.push(component);
            }
        }
    }
    components
}
