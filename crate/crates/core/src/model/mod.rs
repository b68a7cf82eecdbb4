//! Physical system: disorder sampling, pair kernels and the two-channel spectral data.

pub mod config;
pub mod disorder;
pub mod kernel;

pub use config::{uniform_grid, wrap_half_open, wrap_phase, CavityCount, DisorderKind, Engine, SystemConfig};
pub use disorder::{
    channel_rates, disorder_moments, overlap_c, regular_lattice, sample_frequency_offsets,
    sample_gaussian_disorder, sample_realization, sample_uniform_disorder, DisorderMoments,
    DisorderRealization,
};
pub use kernel::InteractionKernel;

/// Alias matching the operation name used in the documentation.
pub fn interaction_kernels(r: &DisorderRealization) -> InteractionKernel {
    InteractionKernel::new(r)
}
