//! Exact ground-state toolkit for the hard-core lattice gas on Z^3.
//!
//! Particles occupy integer sites and any two must be at Euclidean distance at
//! least `D`; everything here is phrased in terms of the integer `d2 = D²`.
//! The crate covers exact lattice geometry ([`lattice`]), periodic
//! configurations and the exclusion constraint ([`admissibility`]), exact
//! maximum packings on finite tori ([`solver`]), the known perfect
//! configurations and layered stackings ([`catalog`]), exact rational Voronoi
//! cells ([`voronoi`]), embeddings of scaled FCC lattices ([`embeddings`]) and
//! local excitations and sliding moves ([`perturbations`]).
//!
//! No floating point is used in any decision; all answers are exact integers
//! or rationals.

pub mod admissibility;
pub mod bitset;
pub mod catalog;
pub mod embeddings;
pub mod error;
pub mod lattice;
pub mod perturbations;
pub mod solver;
pub mod voronoi;

pub use admissibility::{Configuration, ExclusionGraph, WindowConfiguration};
pub use error::{Error, Result};
pub use lattice::{Quotient, Site, SublatticeBasis, SymmetryOp};

/// Exact rational number used for volumes and densities.
pub type Rational = num_rational::BigRational;
