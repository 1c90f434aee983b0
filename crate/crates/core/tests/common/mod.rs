//! Test-only oracles and random generators.
#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap};

use hyperpctl::engine::{prob_next, prob_until_bounded, prob_until_unbounded, SatVector};
use hyperpctl::formula::{desugar, PathFormula, ProbExpr, Relation, StateFormula, Var};
use hyperpctl::model::Dtmc;
use hyperpctl::product::{self_compose, ProductChain, DEFAULT_STATE_BUDGET};
use hyperpctl::qbf::{BoolExpr, Qbf, Quantifier};
use hyperpctl::rational::{rat, Rational};
use num_traits::{One, Zero};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// Splits `1` into `parts` positive fractions over a small denominator.
fn random_distribution(rng: &mut StdRng, parts: usize) -> Vec<Rational> {
    let denominators = [2i64, 3, 4, 5, 6, 8, 10];
    let candidates: Vec<i64> = denominators
        .iter()
        .copied()
        .filter(|&d| d as usize >= parts)
        .collect();
    let d = *candidates.choose(rng).expect("a large enough denominator");
    // Cut points in 1..d.
    let mut cuts: Vec<i64> = (1..d).collect();
    cuts.shuffle(rng);
    let mut cuts: Vec<i64> = cuts.into_iter().take(parts - 1).collect();
    cuts.sort_unstable();
    let mut last = 0;
    let mut out = Vec::with_capacity(parts);
    for c in cuts.into_iter().chain([d]) {
        out.push(rat(c - last, d));
        last = c;
    }
    out
}

/// A random chain with `n` states, out-degree at most `max_degree`, and each
/// proposition in `props` holding at a state with probability 1/2.
pub fn random_chain(rng: &mut StdRng, n: usize, max_degree: usize, props: &[&str]) -> Dtmc {
    let mut transitions = Vec::new();
    for s in 0..n {
        let degree = rng.gen_range(1..=max_degree.min(n));
        let mut targets: Vec<usize> = (0..n).collect();
        targets.shuffle(rng);
        targets.truncate(degree);
        for (t, p) in targets.into_iter().zip(random_distribution(rng, degree)) {
            transitions.push((s, t, p));
        }
    }
    let mut labels = Vec::new();
    for s in 0..n {
        for p in props {
            if rng.gen_bool(0.5) {
                labels.push((s, p.to_string()));
            }
        }
    }
    Dtmc::with_props(n, transitions, labels, props.iter().map(|p| p.to_string()).collect())
        .expect("generated chain is well formed")
}

/// A strongly connected, aperiodic chain: a ring with self-loops plus random
/// extra edges, every row over a small denominator.
pub fn random_ring_chain(rng: &mut StdRng, n: usize, extra: usize, props: &[&str]) -> Dtmc {
    let mut transitions = Vec::new();
    for s in 0..n {
        let mut targets = vec![s, (s + 1) % n];
        targets.dedup();
        while targets.len() < (2 + extra).min(n) {
            let t = rng.gen_range(0..n);
            if !targets.contains(&t) {
                targets.push(t);
            }
        }
        let dist = random_distribution(rng, targets.len());
        for (t, p) in targets.into_iter().zip(dist) {
            transitions.push((s, t, p));
        }
    }
    let mut labels = Vec::new();
    for s in 0..n {
        for p in props {
            if rng.gen_bool(0.5) {
                labels.push((s, p.to_string()));
            }
        }
    }
    Dtmc::with_props(n, transitions, labels, props.iter().map(|p| p.to_string()).collect())
        .expect("generated chain is well formed")
}

const CONSTANTS: [(i64, i64); 6] = [(0, 1), (1, 4), (1, 3), (1, 2), (2, 3), (1, 1)];

/// Random sentences over propositions `a`, `b` with at most `max_quantifiers`
/// quantifiers. Names come from a two-element pool, so nested quantifiers
/// sometimes shadow each other.
pub struct SentenceGen<'r> {
    pub rng: &'r mut StdRng,
    pub quantifiers_left: usize,
}

impl SentenceGen<'_> {
    pub fn sentence(rng: &mut StdRng, max_quantifiers: usize, depth: usize) -> StateFormula {
        let mut g = SentenceGen {
            rng,
            quantifiers_left: max_quantifiers,
        };
        g.state(depth, &[])
    }

    fn constant(&mut self) -> ProbExpr {
        let (p, q) = *CONSTANTS.choose(self.rng).unwrap();
        ProbExpr::constant(rat(p, q))
    }

    fn leaf(&mut self, scope: &[String]) -> StateFormula {
        if scope.is_empty() || self.rng.gen_ratio(1, 6) {
            return if self.rng.gen_bool(0.5) {
                StateFormula::True
            } else {
                StateFormula::False
            };
        }
        let var = scope.choose(self.rng).unwrap().clone();
        let prop = if self.rng.gen_bool(0.5) { "a" } else { "b" };
        StateFormula::atom(prop, var)
    }

    fn state(&mut self, depth: usize, scope: &[String]) -> StateFormula {
        if depth <= 1 {
            return self.leaf(scope);
        }
        let quantify = self.quantifiers_left > 0 && (scope.is_empty() || self.rng.gen_ratio(1, 3));
        if quantify {
            self.quantifiers_left -= 1;
            let name = if self.rng.gen_bool(0.5) { "s" } else { "t" }.to_string();
            let mut inner = scope.to_vec();
            inner.push(name.clone());
            let body = self.state(depth - 1, &inner);
            return if self.rng.gen_bool(0.5) {
                StateFormula::forall(name, body)
            } else {
                StateFormula::exists(name, body)
            };
        }
        match self.rng.gen_range(0..9) {
            0 => self.leaf(scope),
            1 => StateFormula::not(self.state(depth - 1, scope)),
            2 => StateFormula::and(self.state(depth - 1, scope), self.state(depth - 1, scope)),
            3 => StateFormula::or(self.state(depth - 1, scope), self.state(depth - 1, scope)),
            4 => StateFormula::implies(self.state(depth - 1, scope), self.state(depth - 1, scope)),
            5 => StateFormula::iff(self.state(depth - 1, scope), self.state(depth - 1, scope)),
            6 => {
                let p = self.prob_term(depth - 1, scope);
                let (lo, hi) = if self.rng.gen_bool(0.5) {
                    (rat(0, 1), rat(1, 2))
                } else {
                    (rat(1, 3), rat(1, 1))
                };
                StateFormula::InInterval(p, lo, hi)
            }
            _ => {
                let l = self.expr(depth - 1, scope);
                let r = if self.rng.gen_bool(0.5) {
                    self.constant()
                } else {
                    self.expr(depth - 1, scope)
                };
                let rel = *[
                    Relation::Lt,
                    Relation::Le,
                    Relation::Eq,
                    Relation::Ge,
                    Relation::Gt,
                    Relation::Ne,
                ]
                .choose(self.rng)
                .unwrap();
                StateFormula::compare(l, rel, r)
            }
        }
    }

    fn expr(&mut self, depth: usize, scope: &[String]) -> ProbExpr {
        let p = self.prob_term(depth, scope);
        match self.rng.gen_range(0..6) {
            0 => ProbExpr::add(p, self.constant()),
            1 => ProbExpr::sub(self.constant(), p),
            2 => ProbExpr::mul(p, self.constant()),
            _ => p,
        }
    }

    fn prob_term(&mut self, depth: usize, scope: &[String]) -> ProbExpr {
        let d = depth.saturating_sub(1).max(1);
        let k1 = self.rng.gen_range(0..3);
        let k2 = k1 + self.rng.gen_range(0..3);
        let path = match self.rng.gen_range(0..7) {
            0 => PathFormula::Next(self.state(d, scope)),
            1 => PathFormula::Until(self.state(d, scope), self.state(d, scope)),
            2 => PathFormula::BoundedUntil(self.state(d, scope), self.state(d, scope), k1, k2),
            3 => PathFormula::Eventually(self.state(d, scope)),
            4 => PathFormula::Globally(self.state(d, scope)),
            5 => PathFormula::BoundedEventually(self.state(d, scope), k1, k2),
            _ => PathFormula::BoundedGlobally(self.state(d, scope), k1, k2),
        };
        ProbExpr::prob(path)
    }
}

/// Evaluates a named sentence directly from the satisfaction rules:
/// quantifiers append a state to the assignment, atoms read the innermost
/// binding of their variable, and `P(...)` is evaluated on `M^k` for the `k`
/// currently bound states.
pub struct DirectEvaluator<'m> {
    m: &'m Dtmc,
    products: HashMap<usize, ProductChain>,
}

impl<'m> DirectEvaluator<'m> {
    pub fn new(m: &'m Dtmc) -> Self {
        DirectEvaluator {
            m,
            products: HashMap::new(),
        }
    }

    /// Desugars and evaluates `sentence` with no bound states.
    pub fn holds(&mut self, sentence: &StateFormula) -> bool {
        self.state(&desugar(sentence), &mut Vec::new())
    }

    fn product(&mut self, k: usize) -> ProductChain {
        let m = self.m;
        self.products
            .entry(k)
            .or_insert_with(|| match k {
                0 => ProductChain::unit(m),
                k => self_compose(m, k, DEFAULT_STATE_BUDGET).unwrap(),
            })
            .clone()
    }

    fn state(&mut self, f: &StateFormula, env: &mut Vec<(String, usize)>) -> bool {
        use StateFormula as S;
        match f {
            S::True => true,
            S::Atom {
                prop,
                var: Var::Name(name),
            } => {
                let (_, s) = env
                    .iter()
                    .rev()
                    .find(|(n, _)| n == name)
                    .unwrap_or_else(|| panic!("free variable {name}"));
                self.m.has_label(*s, prop)
            }
            S::Not(g) => !self.state(g, env),
            S::And(l, r) => self.state(l, env) && self.state(r, env),
            S::Compare(l, rel, r) => {
                let lv = self.expr(l, env);
                let rv = self.expr(r, env);
                rel.holds(&lv, &rv)
            }
            S::Forall(Var::Name(name), body) | S::Exists(Var::Name(name), body) => {
                let exists = matches!(f, S::Exists(..));
                let mut result = !exists;
                for s in 0..self.m.state_count() {
                    env.push((name.clone(), s));
                    let value = self.state(body, env);
                    env.pop();
                    if value == exists {
                        result = exists;
                        break;
                    }
                }
                result
            }
            other => panic!("not a desugared named formula: {other}"),
        }
    }

    fn expr(&mut self, e: &ProbExpr, env: &mut Vec<(String, usize)>) -> Rational {
        match e {
            ProbExpr::Const(c) => c.clone(),
            ProbExpr::Add(l, r) => self.expr(l, env) + self.expr(r, env),
            ProbExpr::Sub(l, r) => self.expr(l, env) - self.expr(r, env),
            ProbExpr::Mul(l, r) => self.expr(l, env) * self.expr(r, env),
            ProbExpr::Prob(path) => self.path(path, env),
        }
    }

    /// `P(path)` at the current assignment, on the composition of the bound
    /// states.
    fn path(&mut self, path: &PathFormula, env: &mut Vec<(String, usize)>) -> Rational {
        let k = env.len();
        let pc = self.product(k);
        let names: Vec<String> = env.iter().map(|(n, _)| n.clone()).collect();
        let sat = |f: &StateFormula, this: &mut Self| {
            let mut v = SatVector::empty(pc.state_count());
            for t in 0..pc.state_count() {
                let tuple = if k == 0 { Vec::new() } else { pc.decode(t) };
                let mut local: Vec<(String, usize)> =
                    names.iter().cloned().zip(tuple).collect();
                v.set(t, this.state(f, &mut local));
            }
            v
        };
        let vector = match path {
            PathFormula::Next(f) => prob_next(&pc, &sat(f, self)),
            PathFormula::Until(l, r) => {
                let (a, b) = (sat(l, self), sat(r, self));
                prob_until_unbounded(&pc, &a, &b).unwrap()
            }
            PathFormula::BoundedUntil(l, r, k1, k2) => {
                let (a, b) = (sat(l, self), sat(r, self));
                prob_until_bounded(&pc, &a, &b, *k1, *k2)
            }
            other => panic!("not a core path formula: {other}"),
        };
        let here: Vec<usize> = env.iter().map(|(_, s)| *s).collect();
        let index = if k == 0 { 0 } else { pc.encode(&here).unwrap() };
        vector[index].clone()
    }
}

/// `P(sat1 U[k1,k2] sat2)` from `start` by summing over every path prefix of
/// length `k2`.
pub fn bounded_until_by_paths(
    pc: &ProductChain,
    sat1: &SatVector,
    sat2: &SatVector,
    k1: u64,
    k2: u64,
    start: usize,
) -> Rational {
    fn go(
        pc: &ProductChain,
        sat1: &SatVector,
        sat2: &SatVector,
        k1: u64,
        k2: u64,
        s: usize,
        j: u64,
    ) -> Rational {
        if j >= k1 && sat2.get(s) {
            return Rational::one();
        }
        if !sat1.get(s) || j == k2 {
            return Rational::zero();
        }
        pc.successors(s)
            .map(|(t, p)| p * go(pc, sat1, sat2, k1, k2, t, j + 1))
            .fold(Rational::zero(), |a, b| a + b)
    }
    go(pc, sat1, sat2, k1, k2, start, 0)
}

/// Block index per state of the coarsest probabilistic bisimulation, by
/// signature refinement from the label partition.
pub fn coarsest_bisimulation(m: &Dtmc) -> Vec<usize> {
    let n = m.state_count();
    let mut block = renumber((0..n).map(|s| format!("{:?}", m.labels(s))).collect());
    loop {
        let signatures: Vec<String> = (0..n)
            .map(|s| format!("{}|{:?}", block[s], block_distribution(m, &block, s)))
            .collect();
        let next = renumber(signatures);
        if next.iter().max() == block.iter().max() {
            return next;
        }
        block = next;
    }
}

fn renumber(keys: Vec<String>) -> Vec<usize> {
    let mut ids: BTreeMap<String, usize> = BTreeMap::new();
    let mut first_seen: Vec<String> = Vec::new();
    for k in &keys {
        if !ids.contains_key(k) {
            ids.insert(k.clone(), first_seen.len());
            first_seen.push(k.clone());
        }
    }
    keys.iter().map(|k| ids[k]).collect()
}

fn block_distribution(m: &Dtmc, block: &[usize], s: usize) -> BTreeMap<usize, Rational> {
    let mut d = BTreeMap::new();
    for (t, p) in m.successors(s) {
        *d.entry(block[*t]).or_insert_with(Rational::zero) += p;
    }
    d
}

/// Whether the partition (block index per state) is a probabilistic
/// bisimulation: same labels and same block distribution within each block.
pub fn is_bisimulation(m: &Dtmc, block: &[usize]) -> bool {
    let n = m.state_count();
    (0..n).all(|s| {
        (0..n).filter(|&t| block[t] == block[s]).all(|t| {
            m.labels(s) == m.labels(t)
                && block_distribution(m, block, s) == block_distribution(m, block, t)
        })
    })
}

/// A random QBF over `vars` variables whose matrix has exactly
/// `connectives` operators.
pub fn random_qbf(rng: &mut StdRng, vars: usize, connectives: usize) -> Qbf {
    let names: Vec<String> = (1..=vars).map(|i| format!("x{i}")).collect();
    fn matrix(rng: &mut StdRng, names: &[String], budget: usize) -> BoolExpr {
        if budget == 0 {
            return BoolExpr::var(names.choose(rng).unwrap().clone());
        }
        if rng.gen_ratio(1, 4) {
            return BoolExpr::not(matrix(rng, names, budget - 1));
        }
        let left = rng.gen_range(0..budget);
        let l = matrix(rng, names, left);
        let r = matrix(rng, names, budget - 1 - left);
        if rng.gen_bool(0.5) {
            BoolExpr::and(l, r)
        } else {
            BoolExpr::or(l, r)
        }
    }
    let prefix = names
        .iter()
        .map(|n| {
            let q = if rng.gen_bool(0.5) {
                Quantifier::Forall
            } else {
                Quantifier::Exists
            };
            (q, n.clone())
        })
        .collect();
    let m = matrix(rng, &names, connectives);
    Qbf::new(prefix, m).expect("generated QBF is well formed")
}

/// A chain of `n` states built by expanding a random `blocks`-state quotient:
/// each state spreads its block's outgoing probability over the members of
/// the target block. The block assignment is therefore a bisimulation.
pub fn lumpable_chain(rng: &mut StdRng, n: usize, blocks: usize) -> (Dtmc, Vec<usize>) {
    let blocks = blocks.clamp(1, n);
    let mut assignment: Vec<usize> = (0..n).map(|s| if s < blocks { s } else { rng.gen_range(0..blocks) }).collect();
    assignment.shuffle(rng);
    let members: Vec<Vec<usize>> = (0..blocks)
        .map(|b| (0..n).filter(|&s| assignment[s] == b).collect())
        .collect();
    let quotient = random_chain(rng, blocks, 3, &["a"]);
    let mut transitions = Vec::new();
    for s in 0..n {
        for (c, q) in quotient.successors(assignment[s]) {
            let targets = &members[*c];
            let parts = random_distribution(rng, targets.len().min(2));
            let mut chosen = targets.clone();
            chosen.shuffle(rng);
            for (t, p) in chosen.into_iter().zip(parts) {
                transitions.push((s, t, q * p));
            }
        }
    }
    let labels = (0..n)
        .filter(|&s| quotient.has_label(assignment[s], "a"))
        .map(|s| (s, "a".to_string()));
    let m = Dtmc::with_props(n, transitions, labels, ["a".to_string()].into())
        .expect("generated chain is well formed");
    (m, assignment)
}
