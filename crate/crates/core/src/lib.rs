//! Numerical simulator for the volume-preserving curvature flow
//! `dF/dt = (n phi - u H) nu` of star-shaped radial graphs in warped-product
//! spaces `dr^2 + w(r)^2 sigma` over the round unit sphere.
//!
//! The crate is organized bottom-up:
//!
//! - [`ambient`]: warping profiles, conformal data, curvatures, admissibility conditions
//! - [`sphere`]: finite-difference operators and quadrature on `S^1` and axisymmetric `S^2`
//! - [`hypersurface`]: extrinsic geometry and integral diagnostics of one radial graph
//! - [`flow`]: explicit time integration with CFL control and convergence detection
//! - [`isoperimetric`]: isoperimetric profile and the `r*` comparison
//! - [`verify`]: finite-difference oracles for the ambient identities and evolution equations
//! - [`config`], [`commands`]: the batch front end used by the `warpflow` binary

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod ambient;
pub mod commands;
pub mod config;
mod error;
pub mod flow;
pub mod hypersurface;
pub mod initial;
pub mod isoperimetric;
pub mod output;
pub mod quadrature;
pub mod sphere;
mod spline;
pub mod verify;

pub use ambient::{AmbientSpace, ConditionReport, Jet, ProfileFamily, WarpingProfile};
pub use error::{Error, Result};
pub use flow::{FlowConfig, FlowState, RunOutcome, RunRecord, RunStatus, Scheme};
pub use hypersurface::{GeometrySnapshot, RadialGraph};
pub use sphere::{GridSn, Stencil};
pub use spline::CubicSpline;

/// Crate version embedded in every output header.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
