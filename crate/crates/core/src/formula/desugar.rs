use num_traits::One;

use super::{PathFormula, ProbExpr, Relation, StateFormula};
use crate::rational::Rational;

/// Rewrites derived operators into the core grammar.
///
/// `G` only ever occurs as the path of a `P(...)` (the parser enforces this),
/// where it becomes `1 - P(true U !f)`; its bounded form complements a bounded
/// eventually in the same way.
pub fn desugar(formula: &StateFormula) -> StateFormula {
    use StateFormula as S;
    match formula {
        S::True => S::True,
        S::False => S::not(S::True),
        S::Atom { .. } => formula.clone(),
        S::Not(f) => S::not(desugar(f)),
        S::And(l, r) => S::and(desugar(l), desugar(r)),
        S::Or(l, r) => S::not(S::and(S::not(desugar(l)), S::not(desugar(r)))),
        S::Implies(l, r) => S::not(S::and(desugar(l), S::not(desugar(r)))),
        S::Iff(l, r) => {
            let (l, r) = (desugar(l), desugar(r));
            S::and(
                S::not(S::and(l.clone(), S::not(r.clone()))),
                S::not(S::and(r, S::not(l))),
            )
        }
        S::Compare(l, Relation::Ne, r) => {
            S::not(S::Compare(desugar_expr(l), Relation::Eq, desugar_expr(r)))
        }
        S::Compare(l, rel, r) => S::Compare(desugar_expr(l), *rel, desugar_expr(r)),
        S::InInterval(p, lower, upper) => {
            let p = desugar_expr(p);
            S::and(
                S::Compare(ProbExpr::Const(lower.clone()), Relation::Le, p.clone()),
                S::Compare(p, Relation::Le, ProbExpr::Const(upper.clone())),
            )
        }
        S::Forall(v, body) => S::Forall(v.clone(), Box::new(desugar(body))),
        S::Exists(v, body) => S::Exists(v.clone(), Box::new(desugar(body))),
    }
}

/// [`desugar`] for a probability expression.
pub fn desugar_expr(expr: &ProbExpr) -> ProbExpr {
    match expr {
        ProbExpr::Prob(path) => desugar_prob(path),
        ProbExpr::Const(c) => ProbExpr::Const(c.clone()),
        ProbExpr::Add(l, r) => ProbExpr::add(desugar_expr(l), desugar_expr(r)),
        ProbExpr::Sub(l, r) => ProbExpr::sub(desugar_expr(l), desugar_expr(r)),
        ProbExpr::Mul(l, r) => ProbExpr::mul(desugar_expr(l), desugar_expr(r)),
    }
}

fn complement(path: PathFormula) -> ProbExpr {
    ProbExpr::sub(ProbExpr::Const(Rational::one()), ProbExpr::prob(path))
}

fn desugar_prob(path: &PathFormula) -> ProbExpr {
    use PathFormula as P;
    use StateFormula as S;
    let core = match path {
        P::Next(f) => P::Next(desugar(f)),
        P::Until(l, r) => P::Until(desugar(l), desugar(r)),
        P::BoundedUntil(l, r, k1, k2) => P::BoundedUntil(desugar(l), desugar(r), *k1, *k2),
        P::Eventually(f) => P::Until(S::True, desugar(f)),
        P::BoundedEventually(f, k1, k2) => P::BoundedUntil(S::True, desugar(f), *k1, *k2),
        P::Globally(f) => return complement(P::Until(S::True, S::not(desugar(f)))),
        P::BoundedGlobally(f, k1, k2) => {
            return complement(P::BoundedUntil(S::True, S::not(desugar(f)), *k1, *k2))
        }
    };
    ProbExpr::prob(core)
}

/// True when only core variants occur anywhere in the formula.
pub fn is_core(formula: &StateFormula) -> bool {
    use StateFormula as S;
    match formula {
        S::True | S::Atom { .. } => true,
        S::Not(f) | S::Forall(_, f) | S::Exists(_, f) => is_core(f),
        S::And(l, r) => is_core(l) && is_core(r),
        S::Compare(l, rel, r) => *rel != Relation::Ne && is_core_expr(l) && is_core_expr(r),
        S::False | S::Or(..) | S::Implies(..) | S::Iff(..) | S::InInterval(..) => false,
    }
}

fn is_core_expr(expr: &ProbExpr) -> bool {
    match expr {
        ProbExpr::Prob(path) => match path.as_ref() {
            PathFormula::Next(f) => is_core(f),
            PathFormula::Until(l, r) | PathFormula::BoundedUntil(l, r, _, _) => {
                is_core(l) && is_core(r)
            }
            _ => false,
        },
        ProbExpr::Const(_) => true,
        ProbExpr::Add(l, r) | ProbExpr::Sub(l, r) | ProbExpr::Mul(l, r) => {
            is_core_expr(l) && is_core_expr(r)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_formula;
    use crate::rational::rat;
    use StateFormula as S;

    fn core(text: &str) -> StateFormula {
        desugar(&parse_formula(text).unwrap())
    }

    fn reach(f: S) -> ProbExpr {
        ProbExpr::prob(PathFormula::Until(S::True, f))
    }

    #[test]
    fn interval_becomes_two_comparisons() {
        let a = S::atom("a", "s");
        assert_eq!(
            core("P(F a@s) in [1/4, 3/4]"),
            S::and(
                S::Compare(ProbExpr::Const(rat(1, 4)), Relation::Le, reach(a.clone())),
                S::Compare(reach(a), Relation::Le, ProbExpr::Const(rat(3, 4))),
            )
        );
    }

    #[test]
    fn globally_complements_eventually() {
        let a = S::atom("a", "s");
        assert_eq!(
            core("P(G a@s) = 1"),
            S::Compare(
                ProbExpr::sub(ProbExpr::Const(rat(1, 1)), reach(S::not(a))),
                Relation::Eq,
                ProbExpr::Const(rat(1, 1))
            )
        );
        assert_eq!(
            core("P(G[1,3] a@s) = 1"),
            S::Compare(
                ProbExpr::sub(
                    ProbExpr::Const(rat(1, 1)),
                    ProbExpr::prob(PathFormula::BoundedUntil(
                        S::True,
                        S::not(S::atom("a", "s")),
                        1,
                        3
                    ))
                ),
                Relation::Eq,
                ProbExpr::Const(rat(1, 1))
            )
        );
    }

    #[test]
    fn boolean_sugar() {
        let (a, b) = (S::atom("a", "s"), S::atom("b", "s"));
        assert_eq!(
            core("a@s | b@s"),
            S::not(S::and(S::not(a.clone()), S::not(b.clone())))
        );
        assert_eq!(core("a@s => b@s"), S::not(S::and(a.clone(), S::not(b.clone()))));
        assert_eq!(core("false"), S::not(S::True));
        let ne = core("P(X a@s) != 1/2");
        assert!(matches!(ne, S::Not(ref inner) if matches!(**inner, S::Compare(_, Relation::Eq, _))));
    }

    #[test]
    fn bounded_sugar() {
        assert_eq!(
            core("P(a@s U<=3 b@s) > 0"),
            S::Compare(
                ProbExpr::prob(PathFormula::BoundedUntil(
                    S::atom("a", "s"),
                    S::atom("b", "s"),
                    0,
                    3
                )),
                Relation::Gt,
                ProbExpr::Const(rat(0, 1))
            )
        );
        assert_eq!(
            core("P(F[2,4] b@s) > 0"),
            S::Compare(
                ProbExpr::prob(PathFormula::BoundedUntil(S::True, S::atom("b", "s"), 2, 4)),
                Relation::Gt,
                ProbExpr::Const(rat(0, 1))
            )
        );
    }

    #[test]
    fn results_are_core_and_stable() {
        for text in [
            "forall s. exists t. (a@s <=> b@t) | P(G (P(X c@s) != P(X c@t))) = 1",
            "P(F[1,2] a@s) in [0, 1/2] => false",
        ] {
            let once = core(text);
            assert!(is_core(&once));
            assert_eq!(desugar(&once), once);
        }
        assert!(!is_core(&parse_formula("a@s | b@s").unwrap()));
    }
}
