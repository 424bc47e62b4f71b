//! Desk-scale numerical verification of the p-part of the Birch and
//! Swinnerton-Dyer formula for semistable rank-one elliptic curves over Q.

pub mod error;
pub mod certify;
pub mod curve;
pub mod foundation;
pub mod lattice;
pub mod galois;
pub mod heegner;
pub mod heights;
pub mod local;
pub mod padic;
pub mod lseries;
pub mod poly;

pub use error::{Error, Result};
