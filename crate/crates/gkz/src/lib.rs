//! Combinatorics, Γ-series and connection matrices for GKZ/GG hypergeometric systems.

pub mod character;
pub mod connection;
pub mod error;
pub mod geometry;
pub mod lattice;
pub mod linalg;
pub mod lp;
pub mod mellin_barnes;
pub mod serde_c;
pub mod serde_q;
pub mod series;
pub mod special;

pub use error::{GkzError, Result};
pub use num_complex::Complex64 as C64;
