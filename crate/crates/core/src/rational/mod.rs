//! Real rational functions and their state-space realizations.

mod poly;
mod realization;
mod siso;

pub use poly::Poly;
pub use realization::{Realization, MINIMAL_TOL};
pub use siso::{SisoRational, GCD_TOL, MAX_DEGREE};
