//! One function per CLI subcommand. Each returns structured results; the CLI layer
//! writes them out.

use super::config::RunConfig;
use super::runner::{realization_stream, run_ensemble, run_ensemble_with, RunOptions};
use crate::bounds::{bound_report, fit_finite_size, fit_with_exponent, BoundReport, FiniteSizeFit};
use crate::error::SimError;
use crate::exact::ed_collective_cavity_evolve;
use crate::model::{sample_realization, CavityCount, Engine, SystemConfig};
use crate::observables::{
    in_diagonal_band, in_horizontal_band, pearson, rate_pair_histogram, spin_ordering_histogram, EnsembleStatistics,
    HistogramGrid,
};

/// Times the final time may be doubled when the peak sits on the last sample.
pub const MAX_EXTENSIONS: usize = 2;

/// Runs the ensemble, doubling `t_end` (at fixed spacing) while the maximum of
/// `R(t)` sits on the last grid point.
pub fn run_until_peak(config: &SystemConfig, engine: Engine, opts: &RunOptions) -> Result<EnsembleStatistics, SimError> {
    let mut c = config.clone();
    let mut stats = run_ensemble(&c, engine, opts)?;
    for _ in 0..MAX_EXTENSIONS {
        if stats.peak.index + 1 != stats.grid.len() {
            break;
        }
        c.t_end = Some(2.0 * c.t_end());
        c.n_samples = 2 * c.n_samples - 1;
        stats = run_ensemble(&c, engine, opts)?;
    }
    Ok(stats)
}

pub fn run_decay(cfg: &RunConfig, opts: &RunOptions) -> Result<EnsembleStatistics, SimError> {
    let mut o = opts.clone();
    o.record.with_g4 = cfg.with_g4;
    run_until_peak(&cfg.system, cfg.engine, &o)
}

/// Peak of `R(t)` in the scaled units `R★/(γN²)` and `t★γN/ln N`.
#[derive(Debug, Clone, PartialEq)]
pub struct PeakRow {
    pub theta: f64,
    pub delta_omega: f64,
    pub n: usize,
    pub r_star: f64,
    /// Standard error of `R/(γN²)` at the peak sample.
    pub r_star_se: f64,
    pub t_star: f64,
    pub at_boundary: bool,
    pub n_effective: usize,
    pub n_failed: usize,
}

impl PeakRow {
    pub fn from_stats(theta: f64, delta_omega: f64, s: &EnsembleStatistics) -> Self {
        let scale = s.gamma * (s.n_atoms * s.n_atoms) as f64;
        PeakRow {
            theta,
            delta_omega,
            n: s.n_atoms,
            r_star: s.scaled_peak(),
            r_star_se: s.r_of_t.se[s.peak.index] / scale,
            t_star: s.scaled_burst_time(),
            at_boundary: s.peak.at_boundary,
            n_effective: s.n_effective,
            n_failed: s.n_failed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitRow {
    pub theta: f64,
    pub delta_omega: f64,
    pub fit: FiniteSizeFit,
    /// Residual norm of the fit with the other exponent.
    pub alternative_residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub peaks: Vec<PeakRow>,
    pub fits: Vec<FitRow>,
}

/// Peak table over `theta_list × delta_omega_list × n_list` and a finite-size fit per
/// `(Θ, Δω)`. An empty `delta_omega_list` uses the configured `delta_omega`.
pub fn run_sweep(cfg: &RunConfig, opts: &RunOptions) -> Result<SweepResult, SimError> {
    let mut peaks = Vec::new();
    let mut fits = Vec::new();
    let widths = if cfg.delta_omega_list.is_empty() { vec![cfg.system.delta_omega] } else { cfg.delta_omega_list.clone() };
    let mut distinct = cfg.n_list.clone();
    distinct.sort_unstable();
    distinct.dedup();
    for &theta in &cfg.theta_list {
        for &dw in &widths {
            let mut row_set = Vec::new();
            for &n in &cfg.n_list {
                let mut c = cfg.system.clone();
                c.n_atoms = n;
                c.theta = theta;
                c.delta_omega = dw;
                let s = run_until_peak(&c, cfg.engine, opts)?;
                let row = PeakRow::from_stats(theta, dw, &s);
                row_set.push((n, row.r_star));
                peaks.push(row);
            }
            if distinct.len() >= 4 {
                let fit = fit_finite_size(&row_set, theta)?;
                let other = if fit.p == 1.0 { 0.5 } else { 1.0 };
                let alternative_residual = fit_with_exponent(&row_set, other)?.residual_norm;
                fits.push(FitRow { theta, delta_omega: dw, fit, alternative_residual });
            }
        }
    }
    Ok(SweepResult { peaks, fits })
}

pub fn run_g2(cfg: &RunConfig, opts: &RunOptions) -> Result<EnsembleStatistics, SimError> {
    let mut o = opts.clone();
    o.record.with_g4 = true;
    run_ensemble(&cfg.system, cfg.engine, &o)
}

/// Bound reports for `realizations` draws at each Θ in `theta_list`.
pub fn run_bounds(cfg: &RunConfig) -> Result<Vec<BoundReport>, SimError> {
    let mut out = Vec::new();
    for &theta in &cfg.theta_list {
        let mut c = cfg.system.clone();
        c.theta = theta;
        c.validate()?;
        for i in 0..cfg.realizations as u64 {
            let r = sample_realization(&c, &mut realization_stream(c.master_seed, i));
            out.push(bound_report(&r, theta, c.disorder_kind, cfg.restarts, c.master_seed.wrapping_add(i)));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct OrderingResult {
    pub pilot: EnsembleStatistics,
    pub t_star: f64,
    pub histogram: HistogramGrid,
    /// Per-trajectory pair-only `(R_R, R_L)` at `t★`.
    pub rate_pairs: Vec<(f64, f64)>,
    pub rate_histogram: HistogramGrid,
    pub pearson: f64,
    /// Mass in the band `|Δφ ∓ Δξ| < π/4` divided by its uniform share.
    pub diagonal_enrichment: f64,
    pub horizontal_enrichment: f64,
    pub horizontal_mass: f64,
    /// Diagonal band mass outside the horizontal band.
    pub diagonal_only_mass: f64,
}

/// QSDMF pilot run to locate `t★`, then a main run stopped at `t★` that keeps
/// Bloch vectors and directional rates there.
pub fn run_ordering(cfg: &RunConfig, opts: &RunOptions) -> Result<OrderingResult, SimError> {
    let engine = Engine::Qsdmf;
    let mut pilot_cfg = cfg.system.clone();
    pilot_cfg.n_trajectories = cfg.pilot_trajectories.max(1);
    let pilot = run_until_peak(&pilot_cfg, engine, opts)?;
    let k = pilot.peak.index.max(1);
    let mut main = cfg.system.clone();
    main.t_end = Some(pilot.grid[k]);
    main.n_samples = k + 1;
    let t_star = pilot.grid[k];
    let mut o = opts.clone();
    o.record.snapshot_samples = vec![k];
    let mut snaps: Vec<(Vec<f64>, Vec<[f64; 3]>)> = Vec::new();
    let mut rate_pairs = Vec::new();
    run_ensemble_with(&main, engine, &o, |rec| {
        if rec.failed() {
            return Ok(());
        }
        if let (Some(xi), Some(s)) = (&rec.xi, rec.snapshots.first()) {
            snaps.push((xi.clone(), s.bloch.clone()));
        }
        rate_pairs.push(rec.samples[k].pair_rates(rec.gamma));
        Ok(())
    })?;
    let histogram =
        spin_ordering_histogram(snaps.iter().map(|(x, b)| (x.as_slice(), b.as_slice())), t_star, cfg.bins, cfg.pair_budget)?;
    let (dm, du) = histogram.region_mass(in_diagonal_band);
    let (hm, hu) = histogram.region_mass(in_horizontal_band);
    let (dom, _) = histogram.region_mass(|x, y| in_diagonal_band(x, y) && !in_horizontal_band(x, y));
    let rate_histogram = rate_pair_histogram(&rate_pairs, t_star, cfg.bins);
    Ok(OrderingResult {
        pilot,
        t_star,
        histogram,
        pearson: pearson(&rate_pairs),
        rate_pairs,
        rate_histogram,
        diagonal_enrichment: dm / du,
        horizontal_enrichment: hm / hu,
        horizontal_mass: hm,
        diagonal_only_mass: dom,
    })
}

#[derive(Debug, Clone)]
pub struct NonMarkovResult {
    /// `(κ/(γN), DTWA-full statistics)`.
    pub runs: Vec<(f64, EnsembleStatistics)>,
    /// Exact curves for the same κ values when `N ≤ 30`.
    pub exact: Vec<(f64, EnsembleStatistics)>,
}

/// Half-width of the central difference in [`population_rate`], in units of `1/(γN)`.
pub const RATE_HALF_WINDOW: f64 = 0.05;

/// `−½ d⟨Σσᶻ⟩/dt = −N dP_e/dt` from the ensemble-mean excited fraction by central
/// differences over `±RATE_HALF_WINDOW/(γN)`.
pub fn population_rate(s: &EnsembleStatistics) -> (Vec<f64>, Vec<f64>) {
    let n = s.n_atoms as f64;
    let h = s.grid[1] - s.grid[0];
    let k = ((RATE_HALF_WINDOW / (s.gamma * n) / h).round() as usize).max(1);
    let pe = &s.p_e.mean;
    (k..s.grid.len().saturating_sub(k))
        .map(|i| (s.grid[i], -n * (pe[i + k] - pe[i - k]) / (s.grid[i + k] - s.grid[i - k])))
        .unzip()
}

impl NonMarkovResult {
    /// Peak of [`population_rate`] in units of `γN²`.
    pub fn rate_peak(s: &EnsembleStatistics) -> f64 {
        let (t, r) = population_rate(s);
        let p = crate::observables::find_peak(&r, &t).map(|p| p.r_star).unwrap_or(f64::NAN);
        p / (s.gamma * (s.n_atoms * s.n_atoms) as f64)
    }
}

/// Homogeneous atoms in one cavity, swept over `kappa_list` (in units of γN).
pub fn run_nonmarkov(cfg: &RunConfig, opts: &RunOptions) -> Result<NonMarkovResult, SimError> {
    let mut runs = Vec::new();
    let mut exact = Vec::new();
    for &ratio in &cfg.kappa_list {
        let mut c = cfg.system.clone();
        c.cavity_count = CavityCount::OneHomogeneous;
        c.theta = 0.0;
        c.delta_omega = 0.0;
        let kappa = ratio * c.gamma * c.n_atoms as f64;
        c.kappa = Some(kappa);
        c.coupling_g = None;
        let s = run_until_peak(&c, Engine::DtwaFull, opts)?;
        if c.n_atoms <= crate::exact::MAX_ED_ATOMS {
            exact.push((ratio, ed_collective_cavity_evolve(c.n_atoms, c.gamma, kappa, &s.grid)?));
        }
        runs.push((ratio, s));
    }
    Ok(NonMarkovResult { runs, exact })
}

#[derive(Debug, Clone)]
pub struct BenchmarkResult {
    pub qj: EnsembleStatistics,
    pub dtwa: EnsembleStatistics,
    pub qsdmf: EnsembleStatistics,
}

impl BenchmarkResult {
    /// `max |R_method − R_QJ|/(γN²)` over `t ≤ t_max`.
    pub fn max_deviation(&self, method: &EnsembleStatistics, t_max: f64) -> f64 {
        let scale = self.qj.gamma * (self.qj.n_atoms * self.qj.n_atoms) as f64;
        self.qj
            .grid
            .iter()
            .zip(self.qj.r_of_t.mean.iter().zip(&method.r_of_t.mean))
            .filter(|(t, _)| **t <= t_max * (1.0 + 1e-12))
            .map(|(_, (a, b))| (a - b).abs() / scale)
            .fold(0.0, f64::max)
    }
}

/// Quantum jumps, eliminated DTWA and QSDMF on one shared realization.
pub fn run_benchmark(cfg: &RunConfig, opts: &RunOptions) -> Result<BenchmarkResult, SimError> {
    let mut c = cfg.system.clone();
    c.frozen_disorder = true;
    Ok(BenchmarkResult {
        qj: run_ensemble(&c, Engine::QuantumJump, opts)?,
        dtwa: run_ensemble(&c, Engine::DtwaEliminated, opts)?,
        qsdmf: run_ensemble(&c, Engine::Qsdmf, opts)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn small() -> RunConfig {
        let mut c = RunConfig::default();
        c.system.n_atoms = 8;
        c.system.n_trajectories = 40;
        c.system.n_samples = 60;
        c.system.theta = PI;
        c
    }

    #[test]
    fn extension_moves_peak_inside() {
        let mut c = small().system;
        c.theta = 0.0;
        c.t_end = Some(0.05);
        c.n_samples = 11;
        let s = run_until_peak(&c, Engine::DtwaEliminated, &RunOptions::default()).unwrap();
        assert!(s.grid.len() > 11);
    }

    #[test]
    fn benchmark_runs_on_one_realization() {
        let mut c = small();
        c.system.n_atoms = 4;
        c.system.n_trajectories = 30;
        let b = run_benchmark(&c, &RunOptions::default()).unwrap();
        assert_eq!(b.qj.grid, b.dtwa.grid);
        assert!(b.max_deviation(&b.dtwa, b.qj.t_star() * 2.0).is_finite());
        // t = 0: every engine starts at R = γN
        assert!((b.qj.r_of_t.mean[0] - 4.0).abs() < 1e-12);
        assert!((b.qsdmf.r_of_t.mean[0] - 4.0).abs() < 1e-12);
    }

    #[test]
    fn bounds_cover_every_theta() {
        let mut c = small();
        c.realizations = 3;
        let r = run_bounds(&c).unwrap();
        assert_eq!(r.len(), 3 * c.theta_list.len());
        assert!(r.iter().all(|b| b.chain_holds()));
    }

    #[test]
    fn ordering_produces_histograms() {
        let mut c = small();
        c.system.theta = 2.0 * PI;
        c.pilot_trajectories = 10;
        c.system.n_trajectories = 10;
        c.bins = 8;
        let o = run_ordering(&c, &RunOptions::default()).unwrap();
        assert_eq!(o.rate_pairs.len(), 10);
        assert!((o.histogram.total_mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn nonmarkov_pairs_exact_curves() {
        let mut c = small();
        c.system.theta = 0.0;
        c.system.n_trajectories = 20;
        c.kappa_list = vec![1.0, 5.0];
        let r = run_nonmarkov(&c, &RunOptions::default()).unwrap();
        assert_eq!(r.runs.len(), 2);
        assert_eq!(r.exact.len(), 2);
        assert!(NonMarkovResult::rate_peak(&r.runs[1].1) > 0.0);
    }
}
