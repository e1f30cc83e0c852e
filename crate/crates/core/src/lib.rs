//! Numerical laboratory for semiclassical resolvent and local smoothing
//! losses produced by potentials with infinitely many degenerate critical
//! points accumulating at a point.
//!
//! The crate is organised by capability:
//!
//! * [`potential`] builds the dyadic, power-law and alternating families as
//!   smooth evaluable potentials and audits the inequalities that make them
//!   well defined.
//! * [`surgery`] performs the `h`-dependent replacement of the accumulating
//!   tail by the interpolating polynomial.
//! * [`catalog`] holds the exact-rational exponent algebra.
//! * [`operator`] and [`resolvent`] discretize `-h^2 d^2/dx^2 + V - z` and
//!   measure weighted resolvent norms and their scaling in `h`.
//! * [`dynamics`] integrates the Hamiltonian flow and audits escape.
//! * [`smoothing`] evolves single angular modes with Crank-Nicolson.
//! * [`runner`] is the experiment harness behind the `traplab` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod catalog;
pub mod dynamics;
pub mod jet;
pub mod operator;
pub mod potential;
pub mod resolvent;
pub mod runner;
pub mod smoothing;
pub mod step;
pub mod surgery;

pub use catalog::{ExponentPrediction, TrapKind};
pub use jet::Jet;
pub use potential::{FamilySpec, FamilyVariant, PotentialFn};
pub use surgery::SurgeryPlan;
