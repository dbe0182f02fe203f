//! Numerical laboratory for the spectrum of Laplace-Beltrami operators under
//! a change of Riemannian metric on a subset of the manifold.
//!
//! The crate discretizes weighted Dirichlet forms with P1 finite elements on
//! graded simplicial meshes, computes variational capacities and equilibrium
//! potentials of neighborhoods of singular sets, solves the generalized
//! symmetric eigenproblem, and replays the cutoff-transplantation residual
//! chain that transfers quasi-modes between the two metrics of a pair.
//!
//! All computations are deterministic: fixed start vectors, fixed orderings,
//! no random state.

pub mod assemble;
pub mod capacity;
pub mod geometry;
pub mod linalg;
pub mod mesh;
pub mod report;
pub mod spectrum;
pub mod transplant;
