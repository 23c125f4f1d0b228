//! Gaussian Sobolev calculus on level-set domains, Moreau–Yosida approximation
//! along the Cameron–Martin space, and Neumann problems for weighted
//! Ornstein–Uhlenbeck operators in low dimension.

// `!(x > 0.0)` rejects NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ball;
pub mod divergence;
pub mod domain;
pub mod error;
pub mod experiments;
pub mod extension;
pub mod function;
pub mod gaussian;
pub mod moreau;
pub mod nodes;
pub mod norms;
pub mod poly;
pub mod quadrature;
pub mod rng;
pub mod solver;

pub use error::{Error, Result};
