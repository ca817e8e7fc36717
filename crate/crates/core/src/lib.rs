//! Path-space machinery for approximating stochastic processes by processes
//! whose finite-dimensional laws come from a dense family of distributions.
//!
//! The crate is organised bottom-up:
//!
//! - [`paths`]: step (càdlàg) and piecewise-linear paths, dyadic grids and
//!   time reparametrizations.
//! - [`metrics`]: uniform and Skorokhod J1 distances plus the moduli used as
//!   tightness statistics.
//! - [`prokhorov`]: exact Prokhorov distance between finitely supported
//!   measures via maximum flow, with an exhaustive-subset oracle.
//! - [`approximators`]: interpolants built from grid vectors, restriction and
//!   taper.
//! - [`processes`]: reference samplers and the finitely-supported fitter.
//! - [`harness`]: the convergence experiment runner and its reports.

pub mod approximators;
pub mod error;
pub mod harness;
pub mod io;
pub mod metrics;
pub mod paths;
pub mod processes;
pub mod prokhorov;

pub use error::{Error, Result};
pub use paths::{DyadicGrid, Path, PlPath, Reparametrization, StepPath, TaperedPath};
pub use prokhorov::{CouplingCertificate, DiscreteMeasure, Norm};
