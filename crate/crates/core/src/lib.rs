//! Topological invariants of time-reversal-symmetric (class AI) Bloch bundles.

pub mod abelian;
pub mod cohomology;
pub mod error;
pub mod geometry;
pub mod golden;
pub mod invariants;
pub mod ktables;
pub mod linalg;
pub mod models;
pub mod numerics;
pub mod projectors;

pub use abelian::AbelianGroup;
pub use error::{Error, Result};
