//! Numerics for Gaussian-weighted spaces of entire functions over square
//! lattices: log-space Weierstrass sigma evaluation, weighted p-norm
//! quadrature with convergence classification, and dimension counts for
//! zero sets obtained by perturbing the lattice.

pub mod fock;
pub mod funcspec;
pub mod lattice;
pub mod linalg;
pub mod logcx;
pub mod quad;
pub mod report;
pub mod sigma;
pub mod zeroseq;
