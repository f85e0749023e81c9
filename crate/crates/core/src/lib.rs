//! Hyper-positive real functions: matrix sets, rational function algebra,
//! classification, KYP certificates, absolute stability and degree-one RLC
//! synthesis.

pub mod circuits;
pub mod classify;
pub mod error;
pub mod kyp;
pub mod matcore;
pub mod rational;
pub mod sets;
pub mod stability;
pub mod tolerance;

pub use error::{Error, Result};
pub use tolerance::Tolerances;
