//! Multi-objective search for refactorings of annotated software
//! architecture models.
//!
//! Candidate solutions are short sequences of refactoring actions. Each one
//! is scored on four objectives: the change in performance indices obtained
//! from a layered queueing network ([`lqn`]), system reliability
//! ([`reliability`]), the number of detected performance antipatterns
//! ([`antipattern`]) and the architectural distance from the initial model
//! ([`refactoring`]). [`moo`] searches the space with NSGA-II.

pub mod antipattern;
pub mod experiment;
pub mod lqn;
pub mod model;
pub mod moo;
pub mod refactoring;
pub mod reliability;
