//! Numerical laboratory for finite-time blow-up in the rotated
//! Ginzburg-Landau equation e^{-i theta} u_t = Lap u + |u|^alpha u on R^N
//! with radially symmetric data.
//!
//! The crate simulates trajectories with an adaptive IMEX Crank-Nicolson
//! scheme, audits them against the exact mass / energy / variance evolution
//! identities, constructs truncated-variance weights from a smooth mollifier,
//! evaluates closed-form blow-up time bounds, and runs the theta-sweep and
//! scaling-family experiments that exhibit the theta -> +/- pi/2 dichotomy:
//! the blow-up time grows like 1/cos(theta) in the subcritical range
//! alpha < 4/N and stays uniformly bounded for 4/N <= alpha <= 4.
//!
//! Start with the `examples/` directory: each file is a runnable walkthrough
//! of one capability. The `cgl-lab` binary exposes the same operations behind
//! config-driven subcommands.

pub mod bounds;
pub mod cli;
pub mod config;
pub mod diagnostics;
pub mod error;
pub mod experiments;
pub mod field;
pub mod functionals;
pub mod grid;
pub mod integrator;
pub mod serde_util;
pub mod weights;

pub use error::{CglError, Result};
pub use field::ComplexRadialField;
pub use grid::RadialGrid;
