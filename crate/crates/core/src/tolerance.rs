//! Default tolerance ladder shared by all modules.

/// Tolerances used by predicates that compare floating point quantities
/// against exact mathematical conditions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Maximal asymmetry accepted for Hermitian matrices.
    pub herm: f64,
    /// Eigenvalue slack for positive (semi)definiteness tests.
    pub psd: f64,
    /// Entrywise slack for equality checks.
    pub eq: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            herm: 1e-12,
            psd: 1e-10,
            eq: 1e-9,
        }
    }
}
