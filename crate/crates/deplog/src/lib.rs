//! Dependence logic on finite successor structures.
//!
//! This crate provides the full pipeline for working with dependence logic
//! formulae over finite structures whose universe is `{0, .., n-1}` equipped
//! with the built-ins `0`, `max`, and `succ`:
//!
//! * [`syntax`]: abstract syntax, a text parser, a printer, and recognition
//!   of the prenex shape used by the Horn fragments.
//! * [`structure`]: finite successor structures and their JSON encoding.
//! * [`teamsem`]: team semantics evaluation, both by direct recursion on the
//!   compositional clauses and by enumeration of Skolem tables.
//! * [`fragments`]: classification of formulae into the Horn fragments.
//! * [`translate`]: translations between the dependence-logic Horn fragment
//!   and existential second-order Horn sentences, plus the open-formula
//!   constructions built on top of them.
//! * [`ground`]: grounding of second-order Horn sentences to propositional
//!   Horn clauses, unit propagation, DIMACS export, and the polynomial-time
//!   model checker assembled from those pieces.
//! * [`generate`]: seeded random generators for formulae, structures, and
//!   teams, used by the test suite and the CLI.

pub mod fragments;
pub mod generate;
pub mod ground;
pub mod structure;
pub mod syntax;
pub mod teamsem;
pub mod translate;
