//! Exact symbolic engine for lattice vertex algebras, their screening
//! operators and the logarithmic modules obtained by deforming module maps
//! with `Δ(v, x)`.
//!
//! Everything is computed over exact rationals. Lattice coordinates, weights
//! and mode indices are small and live in [`Q64`]; state coefficients and all
//! linear algebra use arbitrary precision [`Rational`].

pub mod affine;
pub mod case;
pub mod deformation;
pub mod descriptor;
pub mod error;
pub mod fock;
pub mod lattice;
pub mod linalg;
pub mod modular;
pub mod modes;
pub mod rational;
pub mod report;
pub mod screening;
pub mod structure;
pub mod suites;
pub mod super_ns;

pub use case::Case;
pub use error::{Error, Result};
pub use fock::{FockBasisVector, FockElement};
pub use lattice::{CaseKind, LatticeConfig, LatticeVector, Sector};
pub use modes::ExtendedSector;
pub use rational::{Q64, Rational};
