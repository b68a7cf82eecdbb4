use super::record::TrajectoryRecord;
use crate::error::SimError;
use crate::model::Engine;

/// Pair-only directional rates `(R_R, R_L)` of one physical trajectory.
pub fn directional_rates(record: &TrajectoryRecord) -> Result<(Vec<f64>, Vec<f64>), SimError> {
    if record.engine != Engine::Qsdmf {
        return Err(SimError::Estimator(format!(
            "directional rates need physical trajectories, got {}",
            record.engine.name()
        )));
    }
    Ok(record.samples.iter().map(|s| s.pair_rates(record.gamma)).unzip())
}

/// Standard deviation across trajectories of `R_R − R_L` at each sample.
pub fn rate_difference_std(records: &[TrajectoryRecord]) -> Result<Vec<f64>, SimError> {
    let ok: Vec<&TrajectoryRecord> = records.iter().filter(|r| !r.failed()).collect();
    let len = ok.first().map(|r| r.samples.len()).unwrap_or(0);
    let mut sum = vec![0.0; len];
    let mut sq = vec![0.0; len];
    for r in &ok {
        let (a, b) = directional_rates(r)?;
        for k in 0..len {
            let d = a[k] - b[k];
            sum[k] += d;
            sq[k] += d * d;
        }
    }
    let n = ok.len() as f64;
    Ok((0..len).map(|k| ((sq[k] - sum[k] * sum[k] / n) / (n - 1.0)).max(0.0).sqrt()).collect())
}

/// `(R_R, R_L)` of every trajectory at sample `k`.
pub fn rate_pairs_at(records: &[TrajectoryRecord], k: usize) -> Result<Vec<(f64, f64)>, SimError> {
    records
        .iter()
        .filter(|r| !r.failed())
        .map(|r| {
            if r.engine != Engine::Qsdmf {
                return Err(SimError::Estimator("non-QSDMF record".into()));
            }
            Ok(r.samples[k].pair_rates(r.gamma))
        })
        .collect()
}
