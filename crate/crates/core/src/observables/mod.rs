//! Ensemble estimators on trajectory records.

pub mod collective;
pub mod directional;
pub mod ensemble;
pub mod histogram;
pub mod peak;
pub mod record;

pub use collective::{collective_sample, g4_moments, CollectiveSample};
pub use directional::{directional_rates, rate_difference_std, rate_pairs_at};
pub use ensemble::{
    decay_rate_estimate, excited_population, g2_estimates, reduce_records, EnsembleAccumulator,
    EnsembleStatistics, Series,
};
pub use histogram::{
    azimuth, in_diagonal_band, in_horizontal_band, pearson, rate_pair_histogram, spin_ordering_histogram, Axis,
    HistogramGrid,
};
pub use peak::{find_peak, Peak};
pub use record::{BlochSnapshot, RecordOptions, TrajectoryRecord};
