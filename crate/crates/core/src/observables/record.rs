use super::collective::CollectiveSample;
use crate::model::Engine;
use num_complex::Complex64;

/// Bloch vectors of all atoms at one time, with the phases of the realization they belong to.
#[derive(Debug, Clone, PartialEq)]
pub struct BlochSnapshot {
    pub t: f64,
    pub bloch: Vec<[f64; 3]>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub index: u64,
    pub engine: Engine,
    pub n_atoms: usize,
    pub gamma: f64,
    pub samples: Vec<CollectiveSample>,
    /// `−½ d⟨Σσᶻ⟩/dt` from the field drive (full DTWA only).
    pub r_field: Option<Vec<f64>>,
    /// Homodyne records `(I_R, I_L)` (QSDMF only).
    pub homodyne: Option<Vec<[Complex64; 2]>>,
    pub snapshots: Vec<BlochSnapshot>,
    /// Phases of the realization used, kept when snapshots are requested.
    pub xi: Option<Vec<f64>>,
    pub failure: Option<String>,
}

impl TrajectoryRecord {
    pub fn new(index: u64, engine: Engine, n_atoms: usize, gamma: f64, capacity: usize) -> Self {
        TrajectoryRecord {
            index,
            engine,
            n_atoms,
            gamma,
            samples: Vec::with_capacity(capacity),
            r_field: None,
            homodyne: None,
            snapshots: Vec::new(),
            xi: None,
            failure: None,
        }
    }

    pub fn failed(&self) -> bool {
        self.failure.is_some()
    }
}

/// What a trajectory run stores beyond the collective sums.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RecordOptions {
    pub with_g4: bool,
    /// Sample indices at which full Bloch vectors are kept.
    pub snapshot_samples: Vec<usize>,
}
