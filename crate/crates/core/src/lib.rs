//! Finite-field transforms, Reed-Solomon syndrome decoding and a desk-scale
//! simulator for Decoded Quantum Interferometry on Optimal Polynomial
//! Intersection instances.

pub mod analytics;
pub mod bench;
pub mod dqi_sim;
pub mod error;
pub mod field;
pub mod grover;
pub mod ntt;
pub mod opi;
pub mod polyseries;
pub mod rsdecode;
pub mod seed;
pub mod verify;

pub use error::{Error, Result};
pub use field::PrimeField;
