//! Exact invariants and classification of complete flat manifolds.
//!
//! The layers build on each other: integer linear algebra ([`zlinalg`]),
//! cohomology of cyclic lattices ([`glattice`]), Bieberbach groups and their
//! abelianizations ([`bieberbach`]), flat bundles and their characteristic
//! classes ([`flatbundle`]), and the classification procedures
//! ([`classify`]). The [`cli`] module is the `cfm` command.

pub mod bieberbach;
pub mod classify;
pub mod cli;
pub mod error;
pub mod flatbundle;
pub mod glattice;
pub mod rational;
pub mod zlinalg;

pub use bieberbach::{abelianization, catalog, AbelianizationData, AffineGen, BieberbachGroupSpec};
pub use error::{Error, Result};
pub use flatbundle::{FlatBase, FlatBundleSpec, LineKind, LineRep, Z2Class};
pub use glattice::{make_glattice, Certificate, GLattice};
pub use zlinalg::{smith_normal_form, AbelianGroup, IntMatrix};
