//! A finite-dimensional laboratory for quantum filtering.
//!
//! The crate provides, over small dense complex matrices:
//!
//! - quantum probability primitives: spectral decompositions, Born
//!   probabilities, the projection postulate, conditional expectations onto
//!   commutative measurement algebras, covariance identities, and the
//!   modular-group invariance criterion ([`qp`]);
//! - the symbolic quantum Ito calculus: the increment table for
//!   dt, dB, dB*, dΛ as rewrite rules, the product formula, and a small
//!   expression parser ([`ito`]);
//! - SLH open-system models with their Lindblad generators and output
//!   fields ([`slh`]), plus a deterministic master-equation propagator
//!   ([`master_eq`]);
//! - the Belavkin filter for homodyne measurement: the linear Zakai SDE for
//!   the unnormalized conditional state, measurement-record simulation in
//!   both the innovations and reference-measure pictures, innovations
//!   whiteness diagnostics, and a repeat-interaction check of the
//!   non-demolition principle ([`belavkin`]);
//! - the classical nonlinear-filtering pipeline run alongside as a
//!   cross-check: Bayes updates on grids, Markov kernels, path simulation,
//!   Kallianpur-Streibel weights, the grid Zakai (DMZ) and
//!   Kushner-Stratonovich filters ([`classical`]);
//! - the von Neumann pointer-measurement model on position grids
//!   ([`pointer`]).
//!
//! All stochastic drivers use the counter-based splittable generator in
//! [`rng`], so every simulation is bit-reproducible from its seed.

pub mod belavkin;
pub mod classical;
pub mod ito;
pub mod linalg;
pub mod master_eq;
pub mod pointer;
pub mod qp;
pub mod rng;
pub mod sampling;
pub mod slh;
pub mod stats;
