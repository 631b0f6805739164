//! Global numerical tolerances.
//!
//! Two tiers: `*_INPUT` tolerances gate what we accept as Hermitian/PSD/
//! normalized input, `*_OUTPUT` tolerances are what constructed objects are
//! required to satisfy. Everything downstream cites these constants instead
//! of inlining magic numbers.

/// A matrix is accepted as Hermitian when `||H - H†||_max` is below this.
pub const HERMITIAN_INPUT: f64 = 1e-12;

/// Eigenvalues of a nominally-PSD matrix may dip this far below zero and are
/// clamped; anything below `PSD_REJECT` is rejected as genuinely indefinite.
pub const PSD_CLAMP: f64 = 1e-12;
pub const PSD_REJECT: f64 = -1e-8;

/// Constructed unitaries must satisfy `||U†U - I||_max` below this.
pub const UNITARY_OUTPUT: f64 = 1e-10;

/// Constructed operator identities (extracted blocks, square roots, ...)
/// must reproduce their targets to this max-norm accuracy.
pub const BLOCK_OUTPUT: f64 = 1e-10;

/// Normalized state vectors satisfy `| <psi|psi> - 1 |` below this.
pub const STATE_NORM: f64 = 1e-12;

/// Relative headroom applied on top of numerically measured norm bounds, so
/// a promised `alpha >= max ||H(s)||` survives grid under-sampling.
pub const ALPHA_HEADROOM: f64 = 1e-6;

/// Dense materialization budget: blocks larger than this dimension are never
/// assembled as matrices (matrix-free application only).
pub const DENSE_DIM_BUDGET: usize = 1 << 12;

/// Default state-vector budget in qubits (2^26 amplitudes).
pub const DEFAULT_MAX_QUBITS: u32 = 26;

/// Truncation-order selection is only bound-backed for eps <= 2^(1-e).
pub fn eps_domain_limit() -> f64 {
    2f64.powf(1.0 - std::f64::consts::E)
}
