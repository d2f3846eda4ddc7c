//! Bounded violation detection for concurrent data structures running on a
//! weakly consistent replicated store.
//!
//! The pipeline: parse a library definition ([`dsl`]), unroll it to guarded
//! atoms ([`frontend`]), encode bounded executions violating a correctness
//! axiom as a ground SMT problem ([`encoder`]), solve and decode the model
//! into a witness ([`driver`]), and validate the witness by replaying it
//! through the executable store semantics ([`store`]). The [`store`] module
//! also hosts an exhaustive enumerator used as a ground-truth oracle at
//! small bounds, and [`driver`] searches the consistency-policy lattice
//! ([`policies`]) for the weakest policy eliminating all bounded violations
//! of the [`axioms`].

pub mod axioms;
pub mod dsl;
pub mod driver;
pub mod encoder;
pub mod frontend;
pub mod policies;
pub mod rel;
pub mod store;
pub mod value;

#[cfg(test)]
pub mod samples;
