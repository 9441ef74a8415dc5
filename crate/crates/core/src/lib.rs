//! Periodic and solitary traveling ground waves of FPU chains with a
//! bi-monomial double-well potential, computed by a constrained gradient
//! flow on the Nehari manifold.
#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN
#![allow(clippy::needless_range_loop)] // index loops read closer to the math

pub mod error;
pub mod flow;
pub mod functionals;
pub mod grid;
pub mod io;
pub mod lattice;
pub mod nehari;
pub mod operator;
pub mod shape;
