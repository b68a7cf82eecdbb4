use crate::error::SimError;
use crate::model::wrap_half_open;
use crate::stream::seed_stream;
use rand::Rng;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub bins: usize,
}

impl Axis {
    pub fn angle(bins: usize) -> Self {
        Axis { lo: -PI, hi: PI, bins }
    }

    pub fn width(&self) -> f64 {
        (self.hi - self.lo) / self.bins as f64
    }

    pub fn center(&self, i: usize) -> f64 {
        self.lo + (i as f64 + 0.5) * self.width()
    }

    fn index(&self, x: f64) -> Option<usize> {
        if !(x >= self.lo && x <= self.hi) {
            return None;
        }
        Some((((x - self.lo) / self.width()) as usize).min(self.bins - 1))
    }
}

/// Two-dimensional count grid; `counts[i * y.bins + j]` holds bin (x_i, y_j).
#[derive(Debug, Clone, PartialEq)]
pub struct HistogramGrid {
    pub x: Axis,
    pub y: Axis,
    pub counts: Vec<f64>,
    pub normalization: f64,
    pub t_label: f64,
    /// Entries dropped because an azimuth was undefined.
    pub excluded: usize,
}

impl HistogramGrid {
    pub fn new(x: Axis, y: Axis, t_label: f64) -> Self {
        HistogramGrid { x, y, counts: vec![0.0; x.bins * y.bins], normalization: 0.0, t_label, excluded: 0 }
    }

    pub fn add(&mut self, xv: f64, yv: f64) {
        if let (Some(i), Some(j)) = (self.x.index(xv), self.y.index(yv)) {
            self.counts[i * self.y.bins + j] += 1.0;
            self.normalization += 1.0;
        }
    }

    pub fn mass(&self, i: usize, j: usize) -> f64 {
        self.counts[i * self.y.bins + j] / self.normalization
    }

    pub fn density(&self, i: usize, j: usize) -> f64 {
        self.mass(i, j) / (self.x.width() * self.y.width())
    }

    pub fn total_mass(&self) -> f64 {
        self.counts.iter().sum::<f64>() / self.normalization
    }

    /// Mass inside a region given by a predicate on bin centres, and the
    /// fraction of the area a uniform density would put there.
    pub fn region_mass<F: Fn(f64, f64) -> bool>(&self, inside: F) -> (f64, f64) {
        let (mut m, mut area) = (0.0, 0.0);
        for i in 0..self.x.bins {
            for j in 0..self.y.bins {
                if inside(self.x.center(i), self.y.center(j)) {
                    m += self.mass(i, j);
                    area += 1.0;
                }
            }
        }
        (m, area / (self.x.bins * self.y.bins) as f64)
    }

    /// Long-format rows `(x centre, y centre, density)`.
    pub fn rows(&self) -> Vec<(f64, f64, f64)> {
        let mut out = Vec::with_capacity(self.counts.len());
        for i in 0..self.x.bins {
            for j in 0..self.y.bins {
                out.push((self.x.center(i), self.y.center(j), self.density(i, j)));
            }
        }
        out
    }
}

/// Azimuth of a Bloch vector, or `None` if it is too close to a pole.
pub fn azimuth(b: &[f64; 3]) -> Option<f64> {
    let r = (b[0] * b[0] + b[1] * b[1]).sqrt();
    let norm = (r * r + b[2] * b[2]).sqrt();
    if norm == 0.0 || r / norm < 0.1 {
        None
    } else {
        Some(b[1].atan2(b[0]))
    }
}

/// Joint histogram of `(Δξ, Δφ)` over atom pairs.
///
/// Each snapshot contributes all ordered pairs when there are at most
/// `pair_budget` of them, otherwise `pair_budget` pairs drawn with a stream keyed
/// by the snapshot position.
pub fn spin_ordering_histogram<'a, I>(snapshots: I, t_star: f64, bins: usize, pair_budget: usize) -> Result<HistogramGrid, SimError>
where
    I: IntoIterator<Item = (&'a [f64], &'a [[f64; 3]])>,
{
    let mut h = HistogramGrid::new(Axis::angle(bins), Axis::angle(bins), t_star);
    let mut skipped = 0usize;
    for (pos, (xi, bloch)) in snapshots.into_iter().enumerate() {
        let n = xi.len();
        let phi: Vec<Option<f64>> = bloch.iter().map(azimuth).collect();
        let mut visit = |i: usize, j: usize, h: &mut HistogramGrid| match (phi[i], phi[j]) {
            (Some(a), Some(b)) => h.add(wrap_half_open(xi[i] - xi[j]), wrap_half_open(a - b)),
            _ => skipped += 1,
        };
        if n * n.saturating_sub(1) <= pair_budget {
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        visit(i, j, &mut h);
                    }
                }
            }
        } else {
            let mut rng = seed_stream(0x5eed_0f_0dde5, pos as u64);
            for _ in 0..pair_budget {
                let i = rng.gen_range(0..n);
                let mut j = rng.gen_range(0..n - 1);
                if j >= i {
                    j += 1;
                }
                visit(i, j, &mut h);
            }
        }
    }
    h.excluded = skipped;
    if h.normalization == 0.0 {
        return Err(SimError::Estimator("no pairs with a defined azimuth".into()));
    }
    Ok(h)
}

/// Joint histogram of per-trajectory `(R_R, R_L)` on a common square range.
pub fn rate_pair_histogram(pairs: &[(f64, f64)], t_star: f64, bins: usize) -> HistogramGrid {
    let hi = pairs.iter().map(|p| p.0.max(p.1)).fold(0.0f64, f64::max).max(f64::MIN_POSITIVE);
    let lo = pairs.iter().map(|p| p.0.min(p.1)).fold(0.0f64, f64::min);
    let axis = Axis { lo, hi, bins };
    let mut h = HistogramGrid::new(axis, axis, t_star);
    for &(a, b) in pairs {
        h.add(a, b);
    }
    h
}

pub fn pearson(pairs: &[(f64, f64)]) -> f64 {
    let n = pairs.len() as f64;
    let mx = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for &(x, y) in pairs {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx).powi(2);
        syy += (y - my).powi(2);
    }
    sxy / (sxx * syy).sqrt()
}

/// Band `|Δφ ∓ Δξ| < π/4` (either sign).
pub fn in_diagonal_band(dxi: f64, dphi: f64) -> bool {
    wrap_half_open(dphi - dxi).abs() < PI / 4.0 || wrap_half_open(dphi + dxi).abs() < PI / 4.0
}

pub fn in_horizontal_band(_dxi: f64, dphi: f64) -> bool {
    dphi.abs() < PI / 4.0
}
