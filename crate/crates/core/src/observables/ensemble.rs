use super::peak::{find_peak, Peak};
use super::record::TrajectoryRecord;
use crate::error::SimError;

/// Mean and standard error on the grid.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Series {
    pub mean: Vec<f64>,
    pub se: Vec<f64>,
}

impl Series {
    pub fn len(&self) -> usize {
        self.mean.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mean.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleStatistics {
    pub grid: Vec<f64>,
    pub n_atoms: usize,
    pub gamma: f64,
    pub r_of_t: Series,
    pub p_e: Series,
    pub r_field: Option<Series>,
    pub g2_auto_rr: Option<Series>,
    pub g2_auto_ll: Option<Series>,
    pub g2_cross_rl: Option<Series>,
    pub g2_total: Option<Series>,
    pub peak: Peak,
    pub n_effective: usize,
    pub n_failed: usize,
}

impl EnsembleStatistics {
    pub fn r_star(&self) -> f64 {
        self.peak.r_star
    }

    pub fn t_star(&self) -> f64 {
        self.peak.t_star
    }

    /// `R★/(γN²)`
    pub fn scaled_peak(&self) -> f64 {
        self.peak.r_star / (self.gamma * (self.n_atoms * self.n_atoms) as f64)
    }

    /// `t★·γN/ln N`
    pub fn scaled_burst_time(&self) -> f64 {
        let n = self.n_atoms as f64;
        self.peak.t_star * self.gamma * n / n.ln()
    }
}

/// Running sums for a vector of `D` per-trajectory values.
#[derive(Debug, Clone)]
struct Moments<const D: usize> {
    sum: Vec<[f64; D]>,
    cross: Vec<[[f64; D]; D]>,
    count: Vec<usize>,
}

impl<const D: usize> Moments<D> {
    fn new(len: usize) -> Self {
        Moments { sum: vec![[0.0; D]; len], cross: vec![[[0.0; D]; D]; len], count: vec![0; len] }
    }

    fn push(&mut self, k: usize, v: [f64; D]) {
        if v.iter().any(|x| !x.is_finite()) {
            return;
        }
        self.count[k] += 1;
        for a in 0..D {
            self.sum[k][a] += v[a];
            for b in a..D {
                self.cross[k][a][b] += v[a] * v[b];
            }
        }
    }

    fn mean(&self, k: usize) -> [f64; D] {
        let n = self.count[k] as f64;
        let mut m = [0.0; D];
        for a in 0..D {
            m[a] = self.sum[k][a] / n;
        }
        m
    }

    /// Variance of `gradᵀ·v` divided by the count (delta method).
    fn delta_var(&self, k: usize, grad: [f64; D]) -> f64 {
        let n = self.count[k] as f64;
        if n < 2.0 {
            return f64::NAN;
        }
        let m = self.mean(k);
        let mut v = 0.0;
        for a in 0..D {
            for b in 0..D {
                let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
                let cov = (self.cross[k][lo][hi] - n * m[lo] * m[hi]) / (n - 1.0);
                v += grad[a] * grad[b] * cov;
            }
        }
        (v / n).max(0.0)
    }
}

/// Ordered reduction of trajectory records into ensemble statistics.
#[derive(Debug, Clone)]
pub struct EnsembleAccumulator {
    grid: Vec<f64>,
    n_atoms: usize,
    gamma: f64,
    basic: Moments<2>,
    field: Moments<1>,
    g4: Moments<5>,
    has_field: bool,
    has_g4: bool,
    n_effective: usize,
    n_failed: usize,
}

impl EnsembleAccumulator {
    pub fn new(grid: Vec<f64>, n_atoms: usize, gamma: f64) -> Self {
        let len = grid.len();
        EnsembleAccumulator {
            grid,
            n_atoms,
            gamma,
            basic: Moments::new(len),
            field: Moments::new(len),
            g4: Moments::new(len),
            has_field: false,
            has_g4: false,
            n_effective: 0,
            n_failed: 0,
        }
    }

    pub fn push(&mut self, rec: &TrajectoryRecord) -> Result<(), SimError> {
        if rec.failed() {
            self.n_failed += 1;
            return Ok(());
        }
        if rec.samples.len() != self.grid.len() {
            return Err(SimError::Grid(format!(
                "record {} has {} samples, grid has {}",
                rec.index,
                rec.samples.len(),
                self.grid.len()
            )));
        }
        self.n_effective += 1;
        let n = self.n_atoms as f64;
        let two_over_gamma = 2.0 / self.gamma;
        for (k, s) in rec.samples.iter().enumerate() {
            self.basic.push(k, [s.rate(), (n + s.sum_sz) / (2.0 * n)]);
            if !s.g4[0].is_nan() {
                self.has_g4 = true;
                self.g4.push(
                    k,
                    [s.g4[0], s.g4[1], s.g4[2], two_over_gamma * s.rate_r, two_over_gamma * s.rate_l],
                );
            }
        }
        if let Some(f) = &rec.r_field {
            self.has_field = true;
            for (k, &v) in f.iter().enumerate() {
                self.field.push(k, [v]);
            }
        }
        Ok(())
    }

    pub fn n_effective(&self) -> usize {
        self.n_effective
    }

    pub fn n_failed(&self) -> usize {
        self.n_failed
    }

    pub fn finish(&self) -> EnsembleStatistics {
        let len = self.grid.len();
        let mut r = Series::default();
        let mut pe = Series::default();
        for k in 0..len {
            let m = self.basic.mean(k);
            r.mean.push(m[0]);
            r.se.push(self.basic.delta_var(k, [1.0, 0.0]).sqrt());
            pe.mean.push(m[1]);
            pe.se.push(self.basic.delta_var(k, [0.0, 1.0]).sqrt());
        }
        let r_field = self.has_field.then(|| {
            let mut s = Series::default();
            for k in 0..len {
                s.mean.push(self.field.mean(k)[0]);
                s.se.push(self.field.delta_var(k, [1.0]).sqrt());
            }
            s
        });
        let (mut rr, mut ll, mut rl, mut tot) =
            (Series::default(), Series::default(), Series::default(), Series::default());
        if self.has_g4 {
            let floor = 1e-12 * (self.gamma * self.n_atoms as f64).powi(2);
            let q = self.gamma * self.gamma / 4.0;
            for k in 0..len {
                let m = self.g4.mean(k);
                let (yr, yl) = (m[3], m[4]);
                let put = |s: &mut Series, den_rate2: f64, val: f64, grad: [f64; 5]| {
                    if den_rate2 < floor || self.g4.count[k] == 0 {
                        s.mean.push(f64::NAN);
                        s.se.push(f64::NAN);
                    } else {
                        s.mean.push(val);
                        s.se.push(self.g4.delta_var(k, grad).sqrt());
                    }
                };
                put(&mut rr, q * yr * yr, m[0] / (yr * yr), [1.0 / (yr * yr), 0.0, 0.0, -2.0 * m[0] / yr.powi(3), 0.0]);
                put(&mut ll, q * yl * yl, m[1] / (yl * yl), [0.0, 1.0 / (yl * yl), 0.0, 0.0, -2.0 * m[1] / yl.powi(3)]);
                put(
                    &mut rl,
                    q * yr * yl,
                    m[2] / (yr * yl),
                    [0.0, 0.0, 1.0 / (yr * yl), -m[2] / (yr * yr * yl), -m[2] / (yr * yl * yl)],
                );
                let s = yr + yl;
                let t = m[0] + m[1] + 2.0 * m[2];
                let g = -2.0 * t / s.powi(3);
                put(&mut tot, q * s * s, t / (s * s), [1.0 / (s * s), 1.0 / (s * s), 2.0 / (s * s), g, g]);
            }
        }
        let peak = find_peak(&r.mean, &self.grid).unwrap_or(Peak {
            r_star: f64::NAN,
            t_star: f64::NAN,
            index: 0,
            at_boundary: true,
        });
        EnsembleStatistics {
            grid: self.grid.clone(),
            n_atoms: self.n_atoms,
            gamma: self.gamma,
            r_of_t: r,
            p_e: pe,
            r_field,
            g2_auto_rr: self.has_g4.then_some(rr),
            g2_auto_ll: self.has_g4.then_some(ll),
            g2_cross_rl: self.has_g4.then_some(rl),
            g2_total: self.has_g4.then_some(tot),
            peak,
            n_effective: self.n_effective,
            n_failed: self.n_failed,
        }
    }
}

pub fn reduce_records(records: &[TrajectoryRecord], grid: &[f64]) -> Result<EnsembleStatistics, SimError> {
    let first = records.iter().find(|r| !r.failed()).ok_or_else(|| SimError::Estimator("no successful trajectories".into()))?;
    let mut acc = EnsembleAccumulator::new(grid.to_vec(), first.n_atoms, first.gamma);
    for r in records {
        acc.push(r)?;
    }
    Ok(acc.finish())
}

/// Ensemble-mean `R(t)` with standard errors.
pub fn decay_rate_estimate(records: &[TrajectoryRecord], grid: &[f64]) -> Result<Series, SimError> {
    Ok(reduce_records(records, grid)?.r_of_t)
}

pub fn excited_population(records: &[TrajectoryRecord], grid: &[f64]) -> Result<Series, SimError> {
    Ok(reduce_records(records, grid)?.p_e)
}

/// `(g²_RR, g²_RL, g̃²)` series.
pub fn g2_estimates(records: &[TrajectoryRecord], grid: &[f64]) -> Result<(Series, Series, Series), SimError> {
    let s = reduce_records(records, grid)?;
    match (s.g2_auto_rr, s.g2_cross_rl, s.g2_total) {
        (Some(a), Some(b), Some(c)) => Ok((a, b, c)),
        _ => Err(SimError::Estimator("records carry no fourth-order sums".into())),
    }
}
