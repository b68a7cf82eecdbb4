//! Monte Carlo wavefunction unraveling of the disordered master equation.

use crate::error::SimError;
use crate::model::{DisorderRealization, Engine, InteractionKernel, SystemConfig};
use crate::observables::{CollectiveSample, RecordOptions, TrajectoryRecord};
use crate::stream::seed_stream;
use num_complex::Complex64;
use rand::Rng;

type C = Complex64;

/// Largest atom number accepted by the dimension guard.
pub const MAX_QJ_ATOMS: usize = 16;

/// Fixed-excitation block of the no-jump generator `−iH_eff` in CSR form.
struct Sector {
    states: Vec<u32>,
    row_start: Vec<u32>,
    cols: Vec<u32>,
    vals: Vec<C>,
    diag: Vec<C>,
    /// Spectral-radius bound used to choose the step.
    radius: f64,
}

/// Precomputed sparse structure for one realization.
pub struct QjSystem {
    n: usize,
    gamma: f64,
    phase: Vec<C>,
    index_of: Vec<u32>,
    sectors: Vec<Sector>,
}

impl QjSystem {
    pub fn new(r: &DisorderRealization, include_hamiltonian: bool) -> Result<Self, SimError> {
        let n = r.n();
        if n > MAX_QJ_ATOMS {
            return Err(SimError::Dimension(format!("quantum jumps need N ≤ {MAX_QJ_ATOMS}, got {n}")));
        }
        let kernel = InteractionKernel::new(r);
        let mut k = vec![vec![C::default(); n]; n];
        for i in 0..n {
            for j in 0..n {
                k[i][j] = if i == j {
                    C::new(1.0, 0.0)
                } else if include_hamiltonian {
                    kernel.coefficient(i, j, &r.positions)
                } else {
                    C::new((r.xi[i] - r.xi[j]).cos(), 0.0)
                };
            }
        }
        let dim = 1usize << n;
        let mut by_count: Vec<Vec<u32>> = vec![Vec::new(); n + 1];
        let mut index_of = vec![0u32; dim];
        for b in 0..dim {
            let c = (b as u32).count_ones() as usize;
            index_of[b] = by_count[c].len() as u32;
            by_count[c].push(b as u32);
        }
        let half = r.gamma / 2.0;
        let max_dw: f64 = r.delta_omega_j.iter().map(|w| w.abs()).sum::<f64>() / 2.0;
        let mut sectors = Vec::with_capacity(n + 1);
        for (exc, states) in by_count.into_iter().enumerate() {
            let mut row_start = Vec::with_capacity(states.len() + 1);
            let mut cols = Vec::new();
            let mut vals = Vec::new();
            let mut diag = Vec::with_capacity(states.len());
            row_start.push(0u32);
            for &b in &states {
                let b = b as usize;
                let mut e = 0.0;
                for j in 0..n {
                    e += if b & (1 << j) != 0 { 0.5 } else { -0.5 } * r.delta_omega_j[j];
                }
                diag.push(C::new(-half * exc as f64, -e));
                for i in 0..n {
                    if b & (1 << i) == 0 {
                        continue;
                    }
                    for j in 0..n {
                        if b & (1 << j) != 0 {
                            continue;
                        }
                        let src = (b ^ (1 << i)) | (1 << j);
                        cols.push(index_of[src]);
                        vals.push(-half * k[i][j]);
                    }
                }
                row_start.push(cols.len() as u32);
            }
            let kf = exc as f64;
            let radius = half * (kf + kf * (n as f64 - kf)) + max_dw;
            sectors.push(Sector { states, row_start, cols, vals, diag, radius });
        }
        Ok(QjSystem { n, gamma: r.gamma, phase: r.phases(), index_of, sectors })
    }

    fn apply(&self, exc: usize, x: &[C], out: &mut [C]) {
        let s = &self.sectors[exc];
        for row in 0..s.states.len() {
            let mut acc = s.diag[row] * x[row];
            let (a, b) = (s.row_start[row] as usize, s.row_start[row + 1] as usize);
            for p in a..b {
                acc += s.vals[p] * x[s.cols[p] as usize];
            }
            out[row] = acc;
        }
    }

    /// `J_R ψ` (`right = true`) or `J_L ψ`, mapping sector `exc` to `exc − 1`.
    fn jump(&self, exc: usize, right: bool, x: &[C], out: &mut Vec<C>) {
        let target = &self.sectors[exc - 1];
        out.clear();
        out.resize(target.states.len(), C::default());
        for (row, &b) in target.states.iter().enumerate() {
            let b = b as usize;
            let mut acc = C::default();
            for j in 0..self.n {
                if b & (1 << j) == 0 {
                    let c = if right { self.phase[j].conj() } else { self.phase[j] };
                    acc += c * x[self.index_of[b | (1 << j)] as usize];
                }
            }
            out[row] = acc;
        }
    }

    fn observe(&self, exc: usize, psi: &[C], with_g4: bool, buf: &mut Vec<C>, buf2: &mut Vec<C>) -> CollectiveSample {
        let total = norm2(psi);
        let mut sample = CollectiveSample {
            sum_sz: 2.0 * exc as f64 - self.n as f64,
            g4: if with_g4 { [0.0; 3] } else { [f64::NAN; 3] },
            ..Default::default()
        };
        if exc == 0 {
            return sample;
        }
        let mut nr = [0.0; 2];
        for (m, right) in [(0, true), (1, false)] {
            self.jump(exc, right, psi, buf);
            nr[m] = norm2(buf) / total;
            if with_g4 && exc >= 2 {
                // RR and LL repeat the channel; RL applies J_L after J_R
                let first = std::mem::take(buf);
                self.jump(exc - 1, right, &first, buf2);
                sample.g4[m] = norm2(buf2) / total;
                if right {
                    self.jump(exc - 1, false, &first, buf2);
                    sample.g4[2] = norm2(buf2) / total;
                }
                *buf = first;
            }
        }
        sample.rate_r = self.gamma / 2.0 * nr[0];
        sample.rate_l = self.gamma / 2.0 * nr[1];
        sample
    }
}

struct Rk4Buf {
    k: [Vec<C>; 4],
    tmp: Vec<C>,
}

impl Rk4Buf {
    fn new() -> Self {
        Rk4Buf { k: Default::default(), tmp: Vec::new() }
    }

    fn resize(&mut self, d: usize) {
        for v in self.k.iter_mut() {
            v.resize(d, C::default());
        }
        self.tmp.resize(d, C::default());
    }
}

/// One RK4 step of the no-jump evolution; `buf.k[0]` must already hold `M ψ`.
fn rk4_step(sys: &QjSystem, exc: usize, psi: &[C], h: f64, buf: &mut Rk4Buf, out: &mut [C]) {
    let d = psi.len();
    for (stage, frac) in [(1usize, 0.5), (2, 0.5), (3, 1.0)] {
        for i in 0..d {
            buf.tmp[i] = psi[i] + buf.k[stage - 1][i] * (frac * h);
        }
        let (head, tail) = buf.k.split_at_mut(stage);
        let _ = head;
        sys.apply(exc, &buf.tmp, &mut tail[0]);
    }
    for i in 0..d {
        out[i] = psi[i] + (buf.k[0][i] + 2.0 * buf.k[1][i] + 2.0 * buf.k[2][i] + buf.k[3][i]) * (h / 6.0);
    }
}

fn norm2(x: &[C]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum()
}

fn dnorm2(x: &[C], mx: &[C]) -> f64 {
    2.0 * x.iter().zip(mx).map(|(a, b)| (a.conj() * b).re).sum::<f64>()
}

/// Cubic Hermite interpolant of ‖ψ‖² on `[0, h]`.
fn hermite(p0: f64, d0: f64, p1: f64, d1: f64, h: f64, s: f64) -> f64 {
    let u = s / h;
    let h00 = 2.0 * u * u * u - 3.0 * u * u + 1.0;
    let h10 = u * u * u - 2.0 * u * u + u;
    let h01 = -2.0 * u * u * u + 3.0 * u * u;
    let h11 = u * u * u - u * u;
    h00 * p0 + h10 * h * d0 + h01 * p1 + h11 * h * d1
}

/// Builds the sparse system for `realization` and runs trajectory `index`.
pub fn run_trajectory(
    config: &SystemConfig,
    realization: &DisorderRealization,
    index: u64,
    opts: &RecordOptions,
) -> Result<TrajectoryRecord, SimError> {
    let sys = QjSystem::new(realization, config.include_hamiltonian)?;
    Ok(quantum_jump_run(config, &sys, index, opts))
}

/// Runs one quantum-jump trajectory from the fully excited state.
pub fn quantum_jump_run(
    config: &SystemConfig,
    sys: &QjSystem,
    index: u64,
    opts: &RecordOptions,
) -> TrajectoryRecord {
    let mut rec = TrajectoryRecord::new(index, Engine::QuantumJump, config.n_atoms, config.gamma, config.n_samples);
    let grid = config.grid();
    let mut rng = seed_stream(config.master_seed, index);
    let n = sys.n;
    let mut exc = n;
    let mut psi = vec![C::new(1.0, 0.0)];
    let mut next = vec![C::default()];
    let mut buf = Rk4Buf::new();
    let (mut jb, mut jb2) = (Vec::new(), Vec::new());
    let mut threshold: f64 = rng.gen();
    let mut t = 0.0;
    let nominal = config.dt;
    rec.samples.push(sys.observe(exc, &psi, opts.with_g4, &mut jb, &mut jb2));
    for &tg in &grid[1..] {
        while t < tg && exc > 0 {
            let d = psi.len();
            buf.resize(d);
            next.resize(d, C::default());
            let stable = 0.2 / sys.sectors[exc].radius;
            let mut h = nominal.map_or(stable, |x| x.min(stable)).min(tg - t);
            if tg - t - h < 1e-12 * tg {
                h = tg - t;
            }
            sys.apply(exc, &psi, &mut buf.k[0]);
            let p0 = norm2(&psi);
            let d0 = dnorm2(&psi, &buf.k[0]);
            rk4_step(sys, exc, &psi, h, &mut buf, &mut next);
            let p1 = norm2(&next);
            if p1 > threshold {
                std::mem::swap(&mut psi, &mut next);
                t = if h == tg - t { tg } else { t + h };
                continue;
            }
            // locate the jump inside the step
            let mut m1 = vec![C::default(); d];
            sys.apply(exc, &next, &mut m1);
            let d1 = dnorm2(&next, &m1);
            let (mut lo, mut hi) = (0.0, h);
            while hi - lo > 1e-6 / config.gamma {
                let mid = 0.5 * (lo + hi);
                if hermite(p0, d0, p1, d1, h, mid) > threshold {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let tau = 0.5 * (lo + hi);
            rk4_step(sys, exc, &psi, tau, &mut buf, &mut next);
            std::mem::swap(&mut psi, &mut next);
            t += tau;
            let mut jr = Vec::new();
            let mut jl = Vec::new();
            sys.jump(exc, true, &psi, &mut jr);
            sys.jump(exc, false, &psi, &mut jl);
            let (wr, wl) = (norm2(&jr), norm2(&jl));
            let chosen = if rng.gen::<f64>() * (wr + wl) < wr { (jr, wr) } else { (jl, wl) };
            let s = chosen.1.sqrt();
            psi = chosen.0.into_iter().map(|v| v / s).collect();
            exc -= 1;
            threshold = rng.gen();
            if !psi.iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
                rec.failure = Some(SimError::NonFinite { t, what: "wavefunction".into() }.to_string());
                return rec;
            }
        }
        t = tg;
        rec.samples.push(sys.observe(exc, &psi, opts.with_g4, &mut jb, &mut jb2));
    }
    rec
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::oracle::DenseLindblad;
    use crate::model::sample_uniform_disorder;
    use crate::observables::reduce_records;
    use std::f64::consts::PI;

    #[test]
    fn guard() {
        let c = SystemConfig::new(MAX_QJ_ATOMS + 1);
        let r = sample_uniform_disorder(&c, &mut seed_stream(0, 0));
        assert!(QjSystem::new(&r, true).is_err());
    }

    #[test]
    fn hermite_reproduces_cubic() {
        let f = |s: f64| 1.0 - 0.3 * s + 0.2 * s * s - 0.1 * s * s * s;
        let df = |s: f64| -0.3 + 0.4 * s - 0.3 * s * s;
        for s in [0.1, 0.5, 0.9] {
            assert!((hermite(f(0.0), df(0.0), f(1.0), df(1.0), 1.0, s) - f(s)).abs() < 1e-14);
        }
    }

    #[test]
    fn generator_matches_dense_heff() {
        // ‖ψ‖² derivative from the sparse block equals −2⟨H_eff anti-Hermitian part⟩
        let c = SystemConfig::new(3).with_theta(2.0);
        let r = sample_uniform_disorder(&c, &mut seed_stream(5, 0));
        let sys = QjSystem::new(&r, true).unwrap();
        let psi = vec![C::new(1.0, 0.0)];
        let mut out = vec![C::default()];
        sys.apply(3, &psi, &mut out);
        // top state: −(γ/2)·N
        assert!((out[0] - C::new(-1.5, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn single_atom_rate() {
        let mut c = SystemConfig::new(1);
        c.t_end = Some(3.0);
        c.n_samples = 7;
        let r = sample_uniform_disorder(&c, &mut seed_stream(0, 0));
        let sys = QjSystem::new(&r, true).unwrap();
        let recs: Vec<_> = (0..10_000).map(|i| quantum_jump_run(&c, &sys, i, &RecordOptions::default())).collect();
        let s = reduce_records(&recs, &c.grid()).unwrap();
        for (k, t) in c.grid().iter().enumerate() {
            assert!((s.r_of_t.mean[k] - (-t).exp()).abs() <= 3.0 * s.r_of_t.se[k] + 1e-12, "{t}");
        }
    }

    fn compare_dense(n: usize, theta: f64, traj: u64) {
        let mut c = SystemConfig::new(n).with_theta(theta);
        c.t_end = Some(1.5);
        c.n_samples = 16;
        let r = sample_uniform_disorder(&c, &mut seed_stream(3, 0));
        let sys = QjSystem::new(&r, true).unwrap();
        let recs: Vec<_> = (0..traj).map(|i| quantum_jump_run(&c, &sys, i, &RecordOptions::default())).collect();
        let s = reduce_records(&recs, &c.grid()).unwrap();
        let dense = DenseLindblad::new(&r, true).evolve_excited(&c.grid(), 1e-3);
        for k in 0..c.n_samples {
            let d = (s.r_of_t.mean[k] - dense[k].rate).abs();
            assert!(d <= 3.5 * s.r_of_t.se[k] + 1e-9, "N={n} t={}: {} vs {}", c.grid()[k], s.r_of_t.mean[k], dense[k].rate);
        }
    }

    #[test]
    fn two_atoms_dicke_match_dense() {
        compare_dense(2, 0.0, 20_000);
    }

    #[test]
    fn four_disordered_atoms_match_dense() {
        compare_dense(4, PI, 20_000);
    }

    #[test]
    fn exact_fourth_moments_at_start() {
        let mut c = SystemConfig::new(3).with_theta(PI);
        c.n_samples = 2;
        c.t_end = Some(0.1);
        let r = sample_uniform_disorder(&c, &mut seed_stream(8, 0));
        let sys = QjSystem::new(&r, true).unwrap();
        let rec = quantum_jump_run(&c, &sys, 0, &RecordOptions { with_g4: true, ..Default::default() });
        let dense = DenseLindblad::new(&r, true);
        let d = dense.observe(&dense.excited_state());
        for q in 0..3 {
            assert!((rec.samples[0].g4[q] - d.g4[q]).abs() < 1e-12);
        }
    }
}
