//! Exact model checking of HyperPCTL sentences over discrete-time Markov
//! chains.
//!
//! A sentence with `n` state quantifiers is checked on the `n`-fold
//! self-composition of the chain. Subformulas are labeled inside out, path
//! probabilities are solved exactly over [`rational::Rational`], and the
//! quantifiers are eliminated component by component.
//!
//! ```
//! use hyperpctl::checker::check;
//! use hyperpctl::model::parse_model;
//!
//! let m = parse_model("states: 2\ntransitions:\n0 0 1/2\n0 1 1/2\n1 1 1\nlabels:\n1: done\n").unwrap();
//! let v = check(&m, "forall s. P(F done@s) = 1").unwrap();
//! assert!(v.satisfied);
//! ```

pub mod bundled;
pub mod checker;
pub mod engine;
pub mod formula;
pub mod model;
pub mod product;
pub mod rational;
pub mod qbf;
pub mod sim;
pub mod templates;
