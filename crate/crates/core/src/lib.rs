//! Central WENO (CWENO) reconstructions of orders 3, 5, 7 and 9 on uniform
//! and non-uniform 1D grids, and a method-of-lines finite-volume solver for
//! conservation and balance laws built on them.

pub mod error;
pub mod grid;
pub mod harness;
pub mod models;
pub mod par;
pub mod poly;
pub mod quadrature;
pub mod reconstruction;
pub mod smoothness;
pub mod solver;

pub use error::{Error, Result};
pub use par::Parallelism;
