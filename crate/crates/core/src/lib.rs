//! Centering of infinitely divisible measures on `R^d`.
//!
//! The crate works with Lévy triplets `[m, D, M]` and answers two questions:
//!
//! * symmetry centering: find one shift `h'` such that `mu * delta(h')` is
//!   invariant under every symmetry `S` of `mu` ([`symmetry`]);
//! * quasi-decomposability centering: given `mu^a = A mu * delta(h)`, decide
//!   whether a single shift makes all such identities strict, and compute it
//!   ([`quasidecomp`]), for atomic measures as well as for the semi-analytic
//!   orbit and mixing representations of semistable and stable Lévy measures
//!   ([`levyrep`]).
//!
//! Grid evaluations are data-parallel when the `parallel` feature is on.

pub mod error;
pub mod exec;
pub mod grid;
pub mod idmeasure;
pub mod levyrep;
pub mod linalg;
pub mod quadrature;
pub mod quasidecomp;
pub mod symmetry;

pub use error::{Error, Result};
pub use exec::ExecMode;
pub use grid::FrequencyGrid;
pub use idmeasure::{Atom, IdMeasure, LevyAtoms};
pub use linalg::{Operator, Subspace, Vector};
