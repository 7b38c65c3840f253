//! Exact algebra of labelled rooted forests under the Grossman–Larson
//! product, its free generator basis and tensor-algebra picture, and the
//! rough-path numerics built on top: Itô lifts, signatures, RDE Euler
//! schemes, expected signatures and unitary-representation transforms.

pub mod error;
pub mod fourier;
pub mod freebasis;
pub mod hopf;
mod linalg;
pub mod poly;
pub mod rde;
pub mod roughpath;
pub mod scalar;
pub mod tensoriso;
pub mod trees;

pub use error::{Error, Result};
