//! Collective spin `J = N/2` coupled to one damped cavity mode, solved on the
//! symmetric basis `|k⟩⊗|n⟩` (k excitations, n photons).
//!
//! `H = ig(J⁻a† − J⁺a)` conserves `k + n` and cavity loss lowers it by one on both
//! sides of ρ, so a state without coherences between excitation sectors stays block
//! diagonal. Each block is integrated as a small dense matrix.

use super::deterministic_statistics;
use crate::error::SimError;
use crate::observables::EnsembleStatistics;
use nalgebra::DMatrix;
use num_complex::Complex64;

type C = Complex64;
type M = DMatrix<C>;

/// Largest atom number accepted by the `(N+1)²` dimension guard.
pub const MAX_ED_ATOMS: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavitySample {
    /// Mean atomic excitation number `⟨k⟩`.
    pub excitations: f64,
    pub photons: f64,
    /// `2g Re⟨J⁺a⟩ = −(1/2) d⟨Σσᶻ⟩/dt`.
    pub rate: f64,
    pub trace: f64,
}

pub struct CavityEd {
    n: usize,
    g: f64,
    kappa: f64,
    /// Lowest photon number in each block `E = k + n`.
    lo: Vec<usize>,
    dim: Vec<usize>,
}

/// Block-diagonal density operator, one matrix per excitation sector.
pub type BlockState = Vec<M>;

impl CavityEd {
    /// Photon space truncated at `n ≤ N`.
    pub fn new(n: usize, g: f64, kappa: f64) -> Result<Self, SimError> {
        if n == 0 || n > MAX_ED_ATOMS {
            return Err(SimError::Dimension(format!("collective cavity model needs 1 ≤ N ≤ {MAX_ED_ATOMS}, got {n}")));
        }
        let mut lo = Vec::new();
        let mut dim = Vec::new();
        for e in 0..=2 * n {
            let a = e.saturating_sub(n);
            let b = e.min(n);
            lo.push(a);
            dim.push(b + 1 - a);
        }
        Ok(CavityEd { n, g, kappa, lo, dim })
    }

    pub fn zero_state(&self) -> BlockState {
        self.dim.iter().map(|&d| M::zeros(d, d)).collect()
    }

    /// `|k⟩⊗|n⟩⟨k|⊗⟨n|`.
    pub fn basis_state(&self, k: usize, photons: usize) -> BlockState {
        assert!(k <= self.n && photons <= self.n);
        let mut s = self.zero_state();
        let e = k + photons;
        s[e][(photons - self.lo[e], photons - self.lo[e])] = C::new(1.0, 0.0);
        s
    }

    /// Pure state inside sector `e`, amplitudes indexed by photon number from the block's lowest.
    pub fn block_pure_state(&self, e: usize, amps: &[C]) -> BlockState {
        assert_eq!(amps.len(), self.dim[e]);
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        let v = nalgebra::DVector::from_iterator(amps.len(), amps.iter().map(|a| a / norm));
        let mut s = self.zero_state();
        s[e] = &v * v.adjoint();
        s
    }

    /// `√(k(N−k+1))·√(n+1)`: amplitude of `J⁻a†` from `(k, n)` to `(k−1, n+1)`.
    fn hop(&self, k: usize, photons: usize) -> f64 {
        ((k * (self.n + 1 - k)) as f64 * (photons + 1) as f64).sqrt()
    }

    fn generator(&self, rho: &BlockState, out: &mut BlockState) {
        let gi = C::new(0.0, self.g);
        for e in 0..rho.len() {
            let (lo, d) = (self.lo[e], self.dim[e]);
            let r = &rho[e];
            let o = &mut out[e];
            // H[i+1][i] = ig·c_i, H[i][i+1] = −ig·c_i
            let c: Vec<f64> = (0..d.saturating_sub(1)).map(|i| self.hop(e - lo - i, lo + i)).collect();
            for a in 0..d {
                for b in 0..d {
                    let mut hr = C::default();
                    if a > 0 {
                        hr += gi * c[a - 1] * r[(a - 1, b)];
                    }
                    if a + 1 < d {
                        hr -= gi * c[a] * r[(a + 1, b)];
                    }
                    let mut rh = C::default();
                    if b > 0 {
                        rh -= gi * c[b - 1] * r[(a, b - 1)];
                    }
                    if b + 1 < d {
                        rh += gi * c[b] * r[(a, b + 1)];
                    }
                    let na = (lo + a) as f64;
                    let nb = (lo + b) as f64;
                    o[(a, b)] = C::new(0.0, -1.0) * (hr - rh) - 0.5 * self.kappa * (na + nb) * r[(a, b)];
                }
            }
            if e + 1 < rho.len() {
                // κ a ρ_{E+1} a†
                let (lo1, d1) = (self.lo[e + 1], self.dim[e + 1]);
                let up = &rho[e + 1];
                for a1 in 0..d1 {
                    let n1 = lo1 + a1;
                    if n1 == 0 {
                        continue;
                    }
                    for b1 in 0..d1 {
                        let m1 = lo1 + b1;
                        if m1 == 0 {
                            continue;
                        }
                        let (a, b) = (n1 - 1 - lo, m1 - 1 - lo);
                        o[(a, b)] += self.kappa * ((n1 * m1) as f64).sqrt() * up[(a1, b1)];
                    }
                }
            }
        }
    }

    pub fn observe(&self, rho: &BlockState) -> CavitySample {
        let mut s = CavitySample { excitations: 0.0, photons: 0.0, rate: 0.0, trace: 0.0 };
        let mut jpa = 0.0;
        for (e, r) in rho.iter().enumerate() {
            let lo = self.lo[e];
            for i in 0..self.dim[e] {
                let p = r[(i, i)].re;
                let photons = lo + i;
                s.trace += p;
                s.photons += photons as f64 * p;
                s.excitations += (e - photons) as f64 * p;
                if i > 0 {
                    // ⟨J⁺a⟩ picks ρ[n][n−1] with amplitude of (k+1, n−1) ← (k, n)
                    jpa += self.hop(e - photons + 1, photons - 1) * r[(i, i - 1)].re;
                }
            }
        }
        s.rate = 2.0 * self.g * jpa;
        s
    }

    /// Smallest eigenvalue over all blocks.
    pub fn min_eigenvalue(&self, rho: &BlockState) -> f64 {
        rho.iter()
            .filter(|r| r.nrows() > 0)
            .map(|r| {
                let h = (r + r.adjoint()) * C::new(0.5, 0.0);
                h.symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min)
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// `½‖ρ − σ‖₁`.
    pub fn trace_distance(&self, a: &BlockState, b: &BlockState) -> f64 {
        0.5 * a
            .iter()
            .zip(b)
            .map(|(x, y)| {
                let d = x - y;
                let h = (&d + d.adjoint()) * C::new(0.5, 0.0);
                h.symmetric_eigenvalues().iter().map(|v| v.abs()).sum::<f64>()
            })
            .sum::<f64>()
    }

    fn step_bound(&self) -> f64 {
        let mut lam = self.kappa * self.n as f64;
        let mut cmax: f64 = 0.0;
        for e in 0..self.dim.len() {
            for i in 0..self.dim[e].saturating_sub(1) {
                cmax = cmax.max(self.hop(e - self.lo[e] - i, self.lo[e] + i));
            }
        }
        lam += 4.0 * self.g * cmax;
        0.1 / lam
    }

    /// RK4 on `grid`, returning the samples and the state at each grid point.
    pub fn evolve(&self, mut rho: BlockState, grid: &[f64]) -> Result<(Vec<CavitySample>, Vec<BlockState>), SimError> {
        let h_max = self.step_bound();
        let mut samples = vec![self.observe(&rho)];
        let mut states = vec![rho.clone()];
        let mut k: [BlockState; 4] = std::array::from_fn(|_| self.zero_state());
        let mut tmp = self.zero_state();
        for w in grid.windows(2) {
            let steps = ((w[1] - w[0]) / h_max).ceil().max(1.0) as usize;
            let h = (w[1] - w[0]) / steps as f64;
            for _ in 0..steps {
                self.generator(&rho, &mut k[0]);
                for (stage, frac) in [(1usize, 0.5), (2, 0.5), (3, 1.0)] {
                    for e in 0..rho.len() {
                        tmp[e] = &rho[e] + &k[stage - 1][e] * C::new(frac * h, 0.0);
                    }
                    let (_, tail) = k.split_at_mut(stage);
                    self.generator(&tmp, &mut tail[0]);
                }
                for e in 0..rho.len() {
                    let inc = (&k[0][e] + &k[1][e] * C::new(2.0, 0.0) + &k[2][e] * C::new(2.0, 0.0) + &k[3][e]) * C::new(h / 6.0, 0.0);
                    rho[e] += inc;
                }
            }
            let s = self.observe(&rho);
            if !(s.rate.is_finite() && s.trace.is_finite()) {
                return Err(SimError::NonFinite { t: w[1], what: "cavity density operator".into() });
            }
            let eig = self.min_eigenvalue(&rho);
            if eig < -1e-8 {
                return Err(SimError::Unphysical { t: w[1], eig });
            }
            samples.push(s);
            states.push(rho.clone());
        }
        Ok((samples, states))
    }
}

/// Homogeneous atoms in one cavity from the fully excited state and the vacuum, with
/// `g = √(γκ)/2` so that the bad-cavity limit decays at `γ` per atom.
pub fn ed_collective_cavity_evolve(n: usize, gamma: f64, kappa: f64, grid: &[f64]) -> Result<EnsembleStatistics, SimError> {
    let g = (gamma * kappa).sqrt() / 2.0;
    let ed = CavityEd::new(n, g, kappa)?;
    let (samples, _) = ed.evolve(ed.basis_state(n, 0), grid)?;
    let r = samples.iter().map(|s| s.rate).collect();
    let pe = samples.iter().map(|s| s.excitations / n as f64).collect();
    Ok(deterministic_statistics(grid, n, gamma, r, pe))
}
