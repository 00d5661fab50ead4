#![recursion_limit = "256"]
//! Conical Radon transform toolkit for Compton-camera geometry.
//!
//! The crate provides the forward transform over cone surfaces with vertices
//! on a line detector, its factorization through the weighted ray transform
//! and the spherical sectional transform, reductions to the 2D/3D Radon
//! transforms, verification checks for the partial-data uniqueness scenarios,
//! dense null-space analysis of the discretized operator, and a constructive
//! reconstruction pipeline (filtered backprojection per vertex followed by
//! least-squares inversion of the ray transform).

pub mod config;
pub mod discrete;
pub mod error;
pub mod field;
pub mod geometry;
pub mod hemifield;
pub mod lattice;
pub mod phantom;
pub mod quadrature;
pub mod recon;
pub mod runner;
pub mod transforms;
pub mod verification;
pub mod volume;

pub use error::{Error, Result};
pub use field::{rasterize, GridSpec, ScalarField3};
pub use geometry::{Aabb, UnitVec3, Vec3};
pub use hemifield::{DiskGrid, HemiField};
pub use lattice::ConeLattice;
pub use phantom::{AnalyticPhantom, Primitive};
pub use transforms::QuadratureSpec;
pub use volume::Volume;
