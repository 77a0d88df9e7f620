//! Homophily-driven signed Friedkin-Johnsen opinion dynamics.
//!
//! A group of `n` agents holds opinions on `m` topics. At every step each
//! agent re-appraises every other agent by the sign of the inner product of
//! their opinion rows, then mixes the signed, `1/n`-scaled opinions of the
//! group with its own initial opinion according to its stubbornness.
//!
//! The crate is organised as:
//!
//! * [`dynamics`]: the coupled opinion/influence recursion and the
//!   simulation loop with convergence and lock detection.
//! * [`transition`]: the transition-matrix recursion `Y(t) = M(t) Y(0)` and
//!   checks on its limit objects.
//! * [`single_topic`]: closed-form limits for a single topic.
//! * [`graph`]: signed graphs and the structural-balance decision.
//! * [`io`]: scenario files, run reports and CSV/DOT export.

pub mod dynamics;
pub mod graph;
pub mod io;
pub mod linalg;
pub mod single_topic;
pub mod transition;

pub use dynamics::{
    influence_update, opinion_step, sgn_scalar, simulate, validate_inputs, DynamicsError,
    OpinionMatrix, SignMatrix, SimulationConfig, SimulationOutcome, Stubbornness,
    ValidatedInputs,
};
pub use graph::{is_structurally_balanced, Balance, SignedGraph};
pub use transition::{InitialGram, TransitionMatrix};
