//! Continuous conjectural-variation duopoly dynamics.
//!
//! Two firms adjust their outputs `u` and `v` in proportion to their marginal
//! profits:
//!
//! ```text
//! du/dt = a u (θ₁ − γ v − L₁ u)
//! dv/dt = ν v (θ₂ − γ u − L₂ v)
//! ```
//!
//! The crate computes the four critical points and their trace–determinant
//! classification, builds the Rionero quadratic Liapunov function around the
//! interior equilibrium together with its basin and decay constants, integrates
//! the system, and checks the absorbing-rectangle and uniqueness bounds
//! numerically.
//!
//! The algebraic parts ([`model`], [`equilibria`], and the quadratic forms in
//! [`liapunov`]) are generic over [`Scalar`], so they evaluate identically on
//! `f64` and on exact rationals such as `num_rational::Ratio<i128>`.
//!
//! `no_std` by default (needs `alloc` for trajectories). The `std` feature only
//! adds `std::error::Error` impls.

#![cfg_attr(not(feature = "std"), no_std)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod equilibria;
pub mod integrator;
pub mod liapunov;
mod math;
pub mod model;
pub mod sampling;
mod scalar;
pub mod verifier;

pub use equilibria::{
    analyze, classify, classify_with_tolerance, closed_form_traces, critical_points,
    jacobian_at, Classification, CriticalPoint, Degeneracy, EquilibriumKind,
    EquilibriumReport, JacobianData, JacobianEntries, TraceDet,
};
pub use integrator::{
    entry_time, integrate, upper_envelope, AbsorbingRect, Component, Event, IntegrateError,
    Method, Trajectory,
};
pub use liapunov::{build_bundle, peculiar_planar, LiapunovBundle, LiapunovError, PlanarSystem};
pub use model::{ModelParams, ParamError, Perturbation, State};
pub use scalar::Scalar;
