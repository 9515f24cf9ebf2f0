//! Exact verification engine for lattice-level strange duality on elliptic
//! K3 surfaces.
//!
//! The crate is organized bottom-up:
//!
//! * [`lattice`]: Néron–Severi lattice models, intersection form, Riemann–Roch.
//! * [`kodaira`]: reducible fiber configurations and the forced-multiple check.
//! * [`nl_divisor`]: reflection to nef classes, the section/fiber decomposition
//!   of the quasipolarization and uniqueness of the fiber class.
//! * [`mukai`]: Mukai vectors, admissibility and the genericity predicates.
//! * [`fourier_mukai`]: the cohomological relative Fourier–Mukai transform.
//! * [`verlinde`]: strange-duality counts, theta normalizations and twists.
//! * [`scenario`] and [`cli`]: scenario files, command dispatch and reports.

pub mod cli;
pub mod fourier_mukai;
pub mod kodaira;
pub mod lattice;
pub mod linalg;
pub mod mukai;
pub mod nl_divisor;
pub mod report;
pub mod scenario;
pub mod snf;
pub mod verlinde;
