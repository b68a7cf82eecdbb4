//! Deterministic parallel ensembles.
//!
//! Trajectory `i` draws its noise from `seed_stream(master_seed, i)` and, unless the
//! disorder is frozen, its realization from [`realization_stream`]. Batches run on a
//! rayon pool and are reduced strictly in index order, so the statistics do not
//! depend on the number of workers.

use crate::dtwa::{self, Variant};
use crate::error::SimError;
use crate::exact::{quantum_jump_run, QjSystem};
use crate::model::{sample_realization, DisorderRealization, Engine, SystemConfig};
use crate::observables::{EnsembleAccumulator, EnsembleStatistics, RecordOptions, TrajectoryRecord};
use crate::qsdmf;
use crate::stream::{seed_stream, Stream, FROZEN_STREAM};
use rayon::prelude::*;

/// Environment variable overriding the worker count.
pub const WORKERS_ENV: &str = "SUPERRAD_WORKERS";

/// XORed into the master seed for realization streams.
pub const REALIZATION_SALT: u64 = 0x6a09_e667_f3bc_c908;

/// Largest tolerated fraction of failed trajectories.
pub const MAX_FAILURE_FRACTION: f64 = 0.01;

pub fn realization_stream(master_seed: u64, index: u64) -> Stream {
    seed_stream(master_seed ^ REALIZATION_SALT, index)
}

/// Realization used by trajectory `index`; the shared one when disorder is frozen.
pub fn realization_for(config: &SystemConfig, index: u64) -> DisorderRealization {
    if config.frozen_disorder {
        sample_realization(config, &mut seed_stream(config.master_seed, FROZEN_STREAM))
    } else {
        sample_realization(config, &mut realization_stream(config.master_seed, index))
    }
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub record: RecordOptions,
    /// Worker threads; `None` reads [`WORKERS_ENV`] and falls back to rayon's default.
    pub workers: Option<usize>,
    /// Trajectories held in memory between reductions.
    pub batch: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { record: RecordOptions::default(), workers: None, batch: 256 }
    }
}

pub fn worker_count(requested: Option<usize>) -> usize {
    requested
        .or_else(|| std::env::var(WORKERS_ENV).ok().and_then(|v| v.parse().ok()))
        .filter(|&n| n > 0)
        .unwrap_or_else(rayon::current_num_threads)
}

enum Prepared {
    Frozen(DisorderRealization, Option<QjSystem>),
    Fresh,
}

fn one(
    config: &SystemConfig,
    engine: Engine,
    prepared: &Prepared,
    index: u64,
    opts: &RecordOptions,
) -> TrajectoryRecord {
    let fresh;
    let (r, sys) = match prepared {
        Prepared::Frozen(r, sys) => (r, sys.as_ref()),
        Prepared::Fresh => {
            fresh = realization_for(config, index);
            (&fresh, None)
        }
    };
    match engine {
        Engine::DtwaFull => dtwa::run_trajectory(config, r, index, Variant::Full, opts),
        Engine::DtwaEliminated => dtwa::run_trajectory(config, r, index, Variant::Eliminated, opts),
        Engine::Qsdmf => qsdmf::run_trajectory(config, r, index, opts),
        Engine::QuantumJump => match sys {
            Some(s) => quantum_jump_run(config, s, index, opts),
            None => match QjSystem::new(r, config.include_hamiltonian) {
                Ok(s) => quantum_jump_run(config, &s, index, opts),
                Err(e) => {
                    let mut rec = TrajectoryRecord::new(index, engine, config.n_atoms, config.gamma, 0);
                    rec.failure = Some(e.to_string());
                    rec
                }
            },
        },
    }
}

/// Errors once failures exceed [`MAX_FAILURE_FRACTION`] of the planned total.
pub fn check_failures(failed: usize, total: usize) -> Result<(), SimError> {
    if failed as f64 > MAX_FAILURE_FRACTION * total as f64 {
        Err(SimError::TooManyFailures { failed, total })
    } else {
        Ok(())
    }
}

/// Runs `config.n_trajectories` trajectories and reduces them in index order.
/// `visit` sees every record, failed ones included, in the same order.
pub fn run_ensemble_with<F>(
    config: &SystemConfig,
    engine: Engine,
    opts: &RunOptions,
    mut visit: F,
) -> Result<EnsembleStatistics, SimError>
where
    F: FnMut(&TrajectoryRecord) -> Result<(), SimError>,
{
    config.validate()?;
    let prepared = if config.frozen_disorder {
        let r = realization_for(config, 0);
        let sys = if engine == Engine::QuantumJump { Some(QjSystem::new(&r, config.include_hamiltonian)?) } else { None };
        Prepared::Frozen(r, sys)
    } else {
        if engine == Engine::QuantumJump && config.n_atoms > crate::exact::MAX_QJ_ATOMS {
            return Err(SimError::Dimension(format!("quantum jumps need N ≤ {}", crate::exact::MAX_QJ_ATOMS)));
        }
        Prepared::Fresh
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(worker_count(opts.workers))
        .build()
        .map_err(|e| SimError::Estimator(format!("cannot start worker pool: {e}")))?;
    let total = config.n_trajectories as u64;
    let mut acc = EnsembleAccumulator::new(config.grid(), config.n_atoms, config.gamma);
    let batch = opts.batch.max(1) as u64;
    let mut start = 0u64;
    while start < total {
        let end = (start + batch).min(total);
        let records: Vec<TrajectoryRecord> = pool.install(|| {
            (start..end).into_par_iter().map(|i| one(config, engine, &prepared, i, &opts.record)).collect()
        });
        for rec in &records {
            acc.push(rec)?;
            visit(rec)?;
        }
        check_failures(acc.n_failed(), total as usize)?;
        start = end;
    }
    Ok(acc.finish())
}

pub fn run_ensemble(config: &SystemConfig, engine: Engine, opts: &RunOptions) -> Result<EnsembleStatistics, SimError> {
    run_ensemble_with(config, engine, opts, |_| Ok(()))
}
