//! Clustering-based model reduction for leader-follower multi-agent networks.
//!
//! A network of `N` identical agents `(A, B, E)` coupled through an undirected
//! weighted graph with Laplacian `L` is reduced by a Petrov-Galerkin projection
//! built from the characteristic matrix `P` of a node partition. The crate
//! computes exact H2 and H-infinity norms of the original, reduced, and error
//! systems and evaluates a-priori error bounds:
//!
//! - [`graph`]: weighted graphs, Laplacians, partitions, almost equitable
//!   partition (AEP) tests, reduced Laplacians, and the closest AEP-compatible
//!   Laplacian for an arbitrary partition.
//! - [`netsys`]: assembly of full, reduced, error, and auxiliary systems.
//! - [`norms`]: H2 (Lyapunov, spectral, quadrature) and H-infinity (frequency
//!   sweep, DC closed form) norms.
//! - [`bounds`]: the bound evaluators and the aggregated [`bounds::BoundReport`].
//! - [`engines`]: a name-keyed registry of norm engines.
//! - [`corpus`]: random and reference instance generators.

pub mod bounds;
pub mod corpus;
pub mod engines;
pub mod error;
pub mod graph;
pub mod linalg;
pub mod netsys;
pub mod norms;

pub use error::{Error, Result};
