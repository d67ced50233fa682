//! Spectral analysis of a doubly-infinite Jacobi operator built from basic
//! hypergeometric series.

pub mod cli;
pub mod eigenfunctions;
pub mod error;
pub mod jacobi;
pub mod oracle;
pub mod qcore;
pub mod quadratic;
mod quadrature;
pub mod spectrum;
pub mod transforms;
pub mod verify;

pub use error::{Error, Result};
pub use qcore::{Complex, QBase};
