//! Potential families with infinitely many degenerate critical points.
//!
//! On `[x_n, x_{n+1}]` the potential is `w L_n + (1 - w) R_n`, where `L_n`
//! and `R_n` are the local Taylor models at the two endpoints and `w` is the
//! smooth step of [`crate::step`]. Left of the first point it blends into a
//! nondegenerate cap at the origin; past the last retained point it follows
//! `1 + (1 - x)^m` and then a `(x - x0)^{-2}` tail.

mod audit;
mod build;
mod family;

use thiserror::Error;

pub use audit::{short_range_audit, warping, ShortRangeReport};
pub use build::{
    build_potential, build_potential_with_tail, build_vtilde, FamilyPotential, ModelPotential, PotentialFn,
    TailConfig, TildeModel,
};
pub use family::{
    feasibility_audit, make_family, CriticalKind, CriticalPointSpec, FamilyDocument, FamilySpec, FamilyVariant,
    FeasibilityReport, IntervalMargin, DEFAULT_APEX, DEFAULT_N_MAX,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PotentialError {
    #[error("order {order} is not odd and >= 3")]
    InvalidOrder { order: u32 },
    #[error("n_max = {n_max} retains fewer than two critical points")]
    TooFewPoints { n_max: u32 },
    #[error("apex value {apex} does not exceed the first critical value {first_value}")]
    ApexTooLow { apex: f64, first_value: f64 },
    #[error("feasibility fails on interval n = {n} (margin {margin:e})")]
    Infeasible { n: u32, margin: f64 },
    #[error("potential not strictly decreasing at x = {x} (V' = {derivative:e})")]
    NotMonotone { x: f64, derivative: f64 },
    #[error("{0}")]
    InvalidParameter(String),
}
