//! Finite-difference experiments for the clamped plate operator `Δ²u − γΔu`:
//! level-set (De Giorgi) estimates, Harnack bounds, and positivity of the
//! solution as `γ` grows.
//!
//! Domains are node lattices ([`geometry`]); the operator is assembled as a
//! symmetric sparse matrix ([`operator`]) and solved by preconditioned CG
//! ([`linalg`]). The inequality checkers live in [`levelset`] and
//! [`harnack`], their constants are calibrated in [`calibration`], and the
//! γ experiments are in [`positivity`].

pub mod calibration;
pub mod error;
pub mod exponents;
pub mod geometry;
pub mod harnack;
pub mod io;
pub mod levelset;
pub mod linalg;
pub mod operator;
pub mod positivity;
pub mod source;

pub use error::{Error, Result};
pub use exponents::{default_exponents, derive_exponents, ExponentSet};
pub use geometry::{build_domain, Ball, DomainMask, Point, Shape};
pub use levelset::{CheckKind, CheckReport};
pub use linalg::{solve_spd, SolveStats, SparseMatrix};
pub use operator::{solve_plate, PlateOperator, ScalarField};
pub use positivity::{Gamma0Variant, GammaScanResult};
pub use source::SourceSpec;
