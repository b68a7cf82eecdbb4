//! Discrete truncated Wigner trajectories, with explicit damped modes or with the
//! modes adiabatically eliminated.

mod eliminated;
mod full;

pub use eliminated::{step_eliminated, ElimWorkspace};
pub use full::{step_full, FullWorkspace};

use crate::error::SimError;
use crate::model::{DisorderRealization, Engine, InteractionKernel, SystemConfig};
use crate::observables::{collective_sample, BlochSnapshot, RecordOptions, TrajectoryRecord};
use crate::stream::{complex_normal, seed_stream, Stream};
use num_complex::Complex64;
use rand::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    Full,
    Eliminated,
}

/// Classical phase-space point of one trajectory.
///
/// `s_minus` lives in the frame rotating with each atom's frequency offset; the
/// physical value is `s_minus[j]·e^{−iδω_j t}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinPhaseState {
    pub s_minus: Vec<Complex64>,
    pub s_z: Vec<f64>,
    pub alpha0: [Complex64; 2],
    pub alpha1: [Complex64; 2],
    pub t: f64,
}

impl SpinPhaseState {
    pub fn physical_s_minus(&self, r: &DisorderRealization, out: &mut [Complex64]) {
        rotate(&self.s_minus, &r.delta_omega_j, -self.t, out);
    }

    pub fn spin_length_sq(&self, j: usize) -> f64 {
        4.0 * self.s_minus[j].norm_sqr() + self.s_z[j] * self.s_z[j]
    }

    pub fn bloch(&self, r: &DisorderRealization) -> Vec<[f64; 3]> {
        let mut w = vec![Complex64::default(); self.s_minus.len()];
        self.physical_s_minus(r, &mut w);
        w.iter().zip(&self.s_z).map(|(s, &z)| [2.0 * s.re, -2.0 * s.im, z]).collect()
    }
}

/// `out_j = x_j·e^{i δω_j t}`; a plain copy when there are no offsets.
pub(crate) fn rotate(x: &[Complex64], dw: &[f64], t: f64, out: &mut [Complex64]) {
    if t == 0.0 || dw.iter().all(|&w| w == 0.0) {
        out.copy_from_slice(x);
    } else {
        for ((o, v), &w) in out.iter_mut().zip(x).zip(dw) {
            *o = v * Complex64::from_polar(1.0, w * t);
        }
    }
}

/// Each atom gets `(±1, ±1, 1)` with equal probability.
pub fn sample_initial_spins<R: Rng + ?Sized>(n: usize, rng: &mut R) -> (Vec<Complex64>, Vec<f64>) {
    let s = (0..n)
        .map(|_| {
            let bits: u8 = rng.gen_range(0..4);
            let sx = if bits & 1 == 0 { 1.0 } else { -1.0 };
            let sy = if bits & 2 == 0 { 1.0 } else { -1.0 };
            Complex64::new(sx, -sy) / 2.0
        })
        .collect();
    (s, vec![1.0; n])
}

/// Vacuum Wigner sample: each quadrature normal with variance 1/4.
pub fn sample_initial_cavity<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    complex_normal(rng, 0.25)
}

pub fn initial_state<R: Rng + ?Sized>(n: usize, variant: Variant, rng: &mut R) -> SpinPhaseState {
    let (s_minus, s_z) = sample_initial_spins(n, rng);
    let alpha0 = match variant {
        Variant::Full => [sample_initial_cavity(rng), sample_initial_cavity(rng)],
        Variant::Eliminated => [Complex64::default(); 2],
    };
    SpinPhaseState { s_minus, s_z, alpha0, alpha1: [Complex64::default(); 2], t: 0.0 }
}

/// Integrates one trajectory over the configured grid.
///
/// The noise stream is `seed_stream(master_seed, index)`; the realization is
/// supplied by the caller.
pub fn run_trajectory(
    config: &SystemConfig,
    realization: &DisorderRealization,
    index: u64,
    variant: Variant,
    opts: &RecordOptions,
) -> TrajectoryRecord {
    let engine = match variant {
        Variant::Full => Engine::DtwaFull,
        Variant::Eliminated => Engine::DtwaEliminated,
    };
    let mut rec = TrajectoryRecord::new(index, engine, config.n_atoms, config.gamma, config.n_samples);
    if let Err(e) = integrate(config, realization, index, variant, opts, &mut rec) {
        rec.failure = Some(e.to_string());
    }
    rec
}

fn integrate(
    config: &SystemConfig,
    r: &DisorderRealization,
    index: u64,
    variant: Variant,
    opts: &RecordOptions,
    rec: &mut TrajectoryRecord,
) -> Result<(), SimError> {
    let n = config.n_atoms;
    let mut rng: Stream = seed_stream(config.master_seed, index);
    let mut state = initial_state(n, variant, &mut rng);
    let engine = if variant == Variant::Full { Engine::DtwaFull } else { Engine::DtwaEliminated };
    let (k_steps, dt) = config.steps_per_sample(engine);
    let grid = config.grid();
    let phase = r.phases();
    let kernel = InteractionKernel::new(r);
    let mut phys = vec![Complex64::default(); n];
    let mut elim = ElimWorkspace::new(config, r, &kernel);
    let mut full = FullWorkspace::new(config, r, &kernel);
    if variant == Variant::Full {
        rec.r_field = Some(Vec::with_capacity(grid.len()));
    }
    if !opts.snapshot_samples.is_empty() {
        rec.xi = Some(r.xi.clone());
    }
    for (k, &t_k) in grid.iter().enumerate() {
        if k > 0 {
            for _ in 0..k_steps {
                match variant {
                    Variant::Eliminated => step_eliminated(&mut state, &mut elim, &mut rng, dt)?,
                    Variant::Full => step_full(&mut state, &mut full, &mut rng, dt)?,
                }
            }
            state.t = t_k;
        }
        state.physical_s_minus(r, &mut phys);
        let sample = collective_sample(&phase, &phys, &state.s_z, config.gamma, opts.with_g4);
        if !sample.rate().is_finite() {
            return Err(SimError::NonFinite { t: t_k, what: "collective sums".into() });
        }
        rec.samples.push(sample);
        if let Some(f) = rec.r_field.as_mut() {
            f.push(full.field_rate(&state, &phys, &sample));
        }
        if opts.snapshot_samples.contains(&k) {
            rec.snapshots.push(BlochSnapshot { t: t_k, bloch: state.bloch(r) });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests;
