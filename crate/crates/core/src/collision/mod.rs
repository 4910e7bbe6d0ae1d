//! Collision operator evaluation: the precomputed spectral table with its
//! fast Fourier path, the brute-force oracle, the cancellation-lemma
//! convolution profile and the damping coefficient.

mod direct;
mod table;

pub use direct::{
    cancellation_s, damping_l_delta_kappa, q_direct, DirectOpts, Interpolation, UDomain,
};

/// Orthonormal frame completing a unit vector; shared by the quadratures
/// that parametrise scattering directions.
pub use direct::frame as frame_of;
pub use table::{SpectralKernelTable, TableParams, DEFAULT_MEMORY_CAP};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CollisionError {
    #[error(transparent)]
    Grid(#[from] crate::grid::GridError),
    #[error("kernel table estimate {estimate} bytes exceeds cap {cap} bytes")]
    MemoryCap { estimate: usize, cap: usize },
    #[error("gain/loss split is undefined for the non-cutoff kernel (eps = 0)")]
    SplitUndefined,
    #[error("oracle path restricted to n_v <= 16, got {0}")]
    OracleScale(usize),
    #[error("L^(delta,kappa) requires delta > 2 eps (delta {delta}, eps {eps})")]
    DeltaTooSmall { delta: f64, eps: f64 },
    #[error("table grid does not match field grid")]
    TableGridMismatch,
}

/// Runtime knobs shared by collision evaluation call sites.
#[derive(Clone, Copy, Debug)]
pub struct CollisionOpts {
    /// Apply the conservation projection after each collision step.
    pub conservation_projection: bool,
    pub table_memory_cap: usize,
}

impl Default for CollisionOpts {
    fn default() -> Self {
        Self {
            conservation_projection: false,
            table_memory_cap: DEFAULT_MEMORY_CAP,
        }
    }
}
