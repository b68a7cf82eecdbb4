use super::config::RunConfig;
use super::experiments::*;
use super::io::{fmt_f64, histogram_csv, table_csv, write_manifest, write_output, write_series, ExperimentManifest};
use super::runner::RunOptions;
use crate::error::{ConfigError, SimError};
use crate::observables::{EnsembleStatistics, Series};
use clap::{Args, Parser, Subcommand};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

#[derive(Parser, Debug)]
#[command(name = "superrad", version, about = "Superradiant burst simulations of disordered emitters coupled to a waveguide")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Decay curve R(t) and excited fraction for one configuration.
    Decay(Common),
    /// Burst peak over a grid of N and Θ with finite-size fits.
    Sweep(Common),
    /// Equal-time second-order coherences.
    G2(Common),
    /// Analytical and variational bounds on the peak emission rate.
    Bounds(Common),
    /// Spin-ordering and directional-rate histograms at the burst peak.
    Ordering(Common),
    /// Single-cavity runs across cavity linewidths, with exact curves for small N.
    Nonmarkov(Common),
    /// Quantum jumps against both approximate engines on one realization.
    Benchmark(Common),
}

#[derive(Args, Debug, Clone, Default)]
pub struct Common {
    /// Config file of `key = value` lines.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Overrides a config key; may repeat.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    #[arg(short = 'N', long)]
    pub n_atoms: Option<String>,
    #[arg(long)]
    pub theta: Option<String>,
    #[arg(long)]
    pub engine: Option<String>,
    #[arg(long)]
    pub trajectories: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    #[arg(long)]
    pub theta_list: Option<String>,
    #[arg(long)]
    pub n_list: Option<String>,
    #[arg(long)]
    pub kappa_list: Option<String>,
    #[arg(long)]
    pub out: Option<String>,
    /// Overwrite existing output files.
    #[arg(long)]
    pub force: bool,
    #[arg(long)]
    pub workers: Option<usize>,
}

impl Common {
    pub fn resolve(&self) -> Result<RunConfig, ConfigError> {
        let mut c = RunConfig::default();
        if let Some(p) = &self.config {
            let text = std::fs::read_to_string(p).map_err(|e| ConfigError::Other(format!("{}: {e}", p.display())))?;
            c.apply_text(&text)?;
        }
        let flags = [
            ("n_atoms", &self.n_atoms),
            ("theta", &self.theta),
            ("engine", &self.engine),
            ("n_trajectories", &self.trajectories),
            ("master_seed", &self.seed),
            ("theta_list", &self.theta_list),
            ("n_list", &self.n_list),
            ("kappa_list", &self.kappa_list),
            ("output_dir", &self.out),
        ];
        for (k, v) in flags {
            if let Some(v) = v {
                c.set(k, v)?;
            }
        }
        for kv in &self.set {
            let (k, v) = kv.split_once('=').ok_or_else(|| ConfigError::Other(format!("--set expects KEY=VALUE, got `{kv}`")))?;
            c.set(k.trim(), v)?;
        }
        c.validate()?;
        Ok(c)
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn cli_run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli.command) {
        Ok(summary) => {
            println!("{summary}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &SimError) -> i32 {
    match e {
        SimError::Config(_) => 2,
        SimError::TooManyFailures { .. } => 3,
        _ => 1,
    }
}

fn manifest_for(name: &str, cfg: &RunConfig) -> ExperimentManifest {
    let mut map: BTreeMap<String, String> = cfg.echo.iter().cloned().collect();
    let s = &cfg.system;
    map.insert("n_atoms".into(), s.n_atoms.to_string());
    map.insert("theta".into(), fmt_f64(s.theta));
    map.insert("t_end".into(), fmt_f64(s.t_end()));
    map.insert("n_samples".into(), s.n_samples.to_string());
    map.insert("n_trajectories".into(), s.n_trajectories.to_string());
    ExperimentManifest::new(name, cfg.engine.name(), s.master_seed, map)
}

fn decay_columns(s: &EnsembleStatistics) -> Vec<(&'static str, &Series)> {
    let mut cols: Vec<(&'static str, &Series)> = vec![("R", &s.r_of_t), ("P_e", &s.p_e)];
    if let Some(f) = &s.r_field {
        cols.push(("R_field", f));
    }
    for (name, g) in [
        ("g2_rr", &s.g2_auto_rr),
        ("g2_ll", &s.g2_auto_ll),
        ("g2_rl", &s.g2_cross_rl),
        ("g2_total", &s.g2_total),
    ] {
        if let Some(g) = g {
            cols.push((name, g));
        }
    }
    cols
}

fn summary(s: &EnsembleStatistics, secs: f64) -> String {
    format!(
        "R*/(gamma N^2) = {:.6}  t* gamma N / ln N = {:.4}  trajectories = {}  seconds = {:.2}",
        s.scaled_peak(),
        s.scaled_burst_time(),
        s.n_effective,
        secs
    )
}

fn tally(m: &mut ExperimentManifest, s: &EnsembleStatistics) {
    m.trajectories += s.n_effective + s.n_failed;
    m.failed_trajectories += s.n_failed;
}

fn label(x: f64) -> String {
    let s = format!("{x}");
    s.replace('.', "p")
}

pub fn execute(cmd: &Command) -> Result<String, SimError> {
    let (name, common) = match cmd {
        Command::Decay(c) => ("decay", c),
        Command::Sweep(c) => ("sweep", c),
        Command::G2(c) => ("g2", c),
        Command::Bounds(c) => ("bounds", c),
        Command::Ordering(c) => ("ordering", c),
        Command::Nonmarkov(c) => ("nonmarkov", c),
        Command::Benchmark(c) => ("benchmark", c),
    };
    let cfg = common.resolve()?;
    let opts = RunOptions { workers: common.workers, ..Default::default() };
    let dir: &Path = &cfg.output_dir;
    std::fs::create_dir_all(dir).map_err(|e| SimError::Io { path: dir.display().to_string(), source: e })?;
    let force = common.force;
    let mut m = manifest_for(name, &cfg);
    let start = Instant::now();
    let line = match name {
        "decay" | "g2" => {
            let s = if name == "decay" { run_decay(&cfg, &opts)? } else { run_g2(&cfg, &opts)? };
            tally(&mut m, &s);
            write_series(dir, &format!("{name}.csv"), &s.grid, &decay_columns(&s), &mut m, force)?;
            summary(&s, start.elapsed().as_secs_f64())
        }
        "sweep" => {
            let r = run_sweep(&cfg, &opts)?;
            let rows: Vec<Vec<f64>> = r
                .peaks
                .iter()
                .map(|p| {
                    vec![
                        p.theta,
                        p.delta_omega,
                        p.n as f64,
                        p.r_star,
                        p.r_star_se,
                        p.t_star,
                        p.at_boundary as u8 as f64,
                        p.n_effective as f64,
                        p.n_failed as f64,
                    ]
                })
                .collect();
            m.trajectories = r.peaks.iter().map(|p| p.n_effective + p.n_failed).sum();
            m.failed_trajectories = r.peaks.iter().map(|p| p.n_failed).sum();
            let header = ["theta", "delta_omega", "n_atoms", "r_star_scaled", "r_star_scaled_se", "t_star_scaled", "at_boundary", "n_effective", "n_failed"];
            write_output(dir, "sweep_peaks.csv", &table_csv(&header, &rows), &mut m, force)?;
            let fits: Vec<Vec<f64>> =
                r.fits.iter().map(|f| vec![f.theta, f.delta_omega, f.fit.p, f.fit.r0, f.fit.r1, f.fit.residual_norm, f.alternative_residual]).collect();
            write_output(dir, "sweep_fits.csv", &table_csv(&["theta", "delta_omega", "p", "r0", "r1", "residual", "alternative_residual"], &fits), &mut m, force)?;
            let mut out = format!("{} peaks, {} fits", r.peaks.len(), r.fits.len());
            for f in &r.fits {
                out.push_str(&format!("\ntheta = {:.4}, delta_omega = {}: R*/(gamma N^2) = {:.5} + {:.4} N^-{}", f.theta, f.delta_omega, f.fit.r0, f.fit.r1, f.fit.p));
            }
            out
        }
        "bounds" => {
            let reports = run_bounds(&cfg)?;
            let opt = |x: Option<f64>| x.unwrap_or(f64::NAN);
            let rows: Vec<Vec<f64>> = reports
                .iter()
                .map(|b| {
                    vec![
                        b.theta,
                        b.n_atoms as f64,
                        opt(b.r_exact_weak),
                        b.r_lower_estimate,
                        opt(b.r_lower_averaged),
                        b.r_variational,
                        b.r_loose,
                        b.iterations as f64,
                        b.exceeds_dicke as u8 as f64,
                    ]
                })
                .collect();
            let header = ["theta", "n_atoms", "r_exact_weak", "r_lower_estimate", "r_lower_averaged", "r_variational", "r_loose", "iterations", "exceeds_dicke"];
            write_output(dir, "bounds.csv", &table_csv(&header, &rows), &mut m, force)?;
            let json = serde_json::to_string_pretty(&reports).map_err(|e| SimError::Estimator(e.to_string()))? + "\n";
            write_output(dir, "bounds.json", &json, &mut m, force)?;
            let held = reports.iter().filter(|b| b.chain_holds()).count();
            format!("{} realizations, bound chain holds for {held}  seconds = {:.2}", reports.len(), start.elapsed().as_secs_f64())
        }
        "ordering" => {
            let o = run_ordering(&cfg, &opts)?;
            tally(&mut m, &o.pilot);
            m.trajectories += o.rate_pairs.len();
            write_series(dir, "ordering_pilot.csv", &o.pilot.grid, &decay_columns(&o.pilot), &mut m, force)?;
            write_output(dir, "spin_ordering.csv", &histogram_csv(&o.histogram, "dxi", "dphi"), &mut m, force)?;
            write_output(dir, "rate_pairs.csv", &histogram_csv(&o.rate_histogram, "rate_r", "rate_l"), &mut m, force)?;
            let pairs: Vec<Vec<f64>> = o.rate_pairs.iter().map(|&(a, b)| vec![a, b]).collect();
            write_output(dir, "rate_pairs_raw.csv", &table_csv(&["rate_r", "rate_l"], &pairs), &mut m, force)?;
            let stats = vec![vec![
                o.t_star,
                o.pearson,
                o.diagonal_enrichment,
                o.horizontal_enrichment,
                o.horizontal_mass,
                o.diagonal_only_mass,
                o.histogram.excluded as f64,
            ]];
            let header = ["t_star", "pearson", "diagonal_enrichment", "horizontal_enrichment", "horizontal_mass", "diagonal_only_mass", "excluded_pairs"];
            write_output(dir, "ordering_summary.csv", &table_csv(&header, &stats), &mut m, force)?;
            format!(
                "t* = {:.5}  pearson = {:.4}  diagonal enrichment = {:.3}  horizontal enrichment = {:.3}  seconds = {:.2}",
                o.t_star,
                o.pearson,
                o.diagonal_enrichment,
                o.horizontal_enrichment,
                start.elapsed().as_secs_f64()
            )
        }
        "nonmarkov" => {
            let r = run_nonmarkov(&cfg, &opts)?;
            let mut rows = Vec::new();
            for (ratio, s) in &r.runs {
                tally(&mut m, s);
                write_series(dir, &format!("nonmarkov_kappa{}.csv", label(*ratio)), &s.grid, &decay_columns(s), &mut m, force)?;
                let exact = r.exact.iter().find(|(k, _)| k == ratio).map(|(_, e)| e);
                if let Some(e) = exact {
                    write_series(dir, &format!("nonmarkov_kappa{}_exact.csv", label(*ratio)), &e.grid, &[("R", &e.r_of_t), ("P_e", &e.p_e)], &mut m, force)?;
                }
                rows.push(vec![
                    *ratio,
                    s.scaled_peak(),
                    NonMarkovResult::rate_peak(s),
                    exact.map(|e| e.scaled_peak()).unwrap_or(f64::NAN),
                ]);
            }
            write_output(dir, "nonmarkov_peaks.csv", &table_csv(&["kappa_over_gamma_n", "r_star_scaled", "r_population_star_scaled", "r_exact_star_scaled"], &rows), &mut m, force)?;
            let mut out = String::new();
            for row in &rows {
                out.push_str(&format!("kappa/(gamma N) = {}: R*/(gamma N^2) = {:.5} (population {:.5}, exact {:.5})\n", row[0], row[1], row[2], row[3]));
            }
            out + &format!("seconds = {:.2}", start.elapsed().as_secs_f64())
        }
        "benchmark" => {
            let b = run_benchmark(&cfg, &opts)?;
            for s in [&b.qj, &b.dtwa, &b.qsdmf] {
                tally(&mut m, s);
            }
            let scale = b.qj.gamma * (b.qj.n_atoms * b.qj.n_atoms) as f64;
            let diff = |o: &EnsembleStatistics| Series {
                mean: b.qj.r_of_t.mean.iter().zip(&o.r_of_t.mean).map(|(a, c)| (c - a).abs() / scale).collect(),
                se: b.qj.r_of_t.se.iter().zip(&o.r_of_t.se).map(|(a, c)| (a * a + c * c).sqrt() / scale).collect(),
            };
            let (dd, dq) = (diff(&b.dtwa), diff(&b.qsdmf));
            let cols = [
                ("R_qj", &b.qj.r_of_t),
                ("R_dtwa", &b.dtwa.r_of_t),
                ("R_qsdmf", &b.qsdmf.r_of_t),
                ("dev_dtwa", &dd),
                ("dev_qsdmf", &dq),
            ];
            write_series(dir, "benchmark.csv", &b.qj.grid, &cols, &mut m, force)?;
            let horizon = 2.0 * b.qj.t_star();
            format!(
                "max |R - R_qj|/(gamma N^2) for t <= 2t*: dtwa {:.4}  qsdmf {:.4}  seconds = {:.2}",
                b.max_deviation(&b.dtwa, horizon),
                b.max_deviation(&b.qsdmf, horizon),
                start.elapsed().as_secs_f64()
            )
        }
        _ => unreachable!(),
    };
    m.wall_seconds = start.elapsed().as_secs_f64();
    write_manifest(dir, &m, force)?;
    Ok(line)
}
