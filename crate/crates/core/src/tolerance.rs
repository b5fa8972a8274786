use serde::{Deserialize, Serialize};

/// Numerical thresholds shared by the Hilbert-space model.
///
/// Defaults are sized for dense double-precision algebra at dimension 16 or
/// below.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// `||M - M^dagger||` bound for Hermitian matrices.
    pub herm: f64,
    /// `||M^2 - M||` bound for projectors.
    pub idem: f64,
    /// Generic matrix equality (orthogonality, resolutions of identity, commutators).
    pub num: f64,
    /// Smallest admissible eigenvalue of a density matrix is `-psd`.
    pub psd: f64,
    /// Trace and probability-sum slack.
    pub tr: f64,
    /// Probabilities at or below this have no post-measurement state.
    pub zero: f64,
    /// Singular values below `rank * largest` count as zero.
    pub rank: f64,
    /// Default eigenvalue grouping for spectral decompositions.
    pub group: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { herm: 1e-9, idem: 1e-9, num: 1e-9, psd: 1e-10, tr: 1e-10, zero: 1e-12, rank: 1e-8, group: 1e-8 }
    }
}

/// Purity threshold: `Tr(rho^2) > 1 - PURITY_SLACK`.
pub const PURITY_SLACK: f64 = 1e-9;
